//! `glsc`: compress, decompress, corrupt and experiment with GLS-coded files.
//!
//! Exit codes: 0 on success, 1 on usage, I/O or format errors, 2 when
//! decompression detects a corrupted payload.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use gls_cantor::codec::{
    code_rate, code_rate_exact, entropy_bits_per_symbol, redundancy_bits_per_symbol,
};
use gls_cantor::noise_lab::{self, TableConfig};
use gls_cantor::repetition::{
    box_counting_dimension, cantor_approx, rep_decode_majority, rep_encode, RepetitionParams,
};
use gls_cantor::{
    decode, encode, BitString, CompressedArtifact, DecodeOutcome, ExactRational, MapMode,
};

const EXIT_DETECTED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "glsc",
    version,
    about = "GLS-coding with forbidden-symbol error detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a raw bit file into a GLSC container.
    Compress {
        input: PathBuf,
        output: PathBuf,
        /// Forbidden-symbol width, e.g. `3/100` or `0.03`.
        #[arg(long, default_value = "0")]
        epsilon: ExactRational,
        #[arg(long, default_value = "tent")]
        mode: MapMode,
    },
    /// Decompress a GLSC container; exits with 2 if an error is detected.
    Decompress { input: PathBuf, output: PathBuf },
    /// Flip one payload bit of a GLSC container.
    Corrupt {
        input: PathBuf,
        output: PathBuf,
        /// Distance from the end of the payload; 1 is the last bit.
        #[arg(long)]
        distance: usize,
    },
    /// Write a random message with zero probability `p` to a raw bit file.
    Random {
        output: PathBuf,
        #[arg(long)]
        p: ExactRational,
        /// Message length in symbols.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Repetition-encode a raw bit file.
    RepEncode {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Majority-decode a repetition-coded bit file.
    RepDecode {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Run single-bit-flip detection trials near the end of the payload.
    Experiment {
        /// Probability of a zero in the generated messages.
        #[arg(long)]
        p: ExactRational,
        /// Message length in symbols.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.005,0.03,0.05")]
        epsilons: Vec<ExactRational>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest flip distance from the end of the payload.
        #[arg(long, default_value_t = 250)]
        d_max: usize,
        #[arg(long, default_value = "tent")]
        mode: MapMode,
        /// Per-trial CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Aggregated JSON report.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Box-counting dimension and measure of the repetition-code Cantor set.
    CantorDim {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        k: u32,
        /// Also list the surviving intervals.
        #[arg(long)]
        intervals: bool,
    },
}

fn read_bits(path: &Path) -> Result<BitString> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    BitString::from_length_prefixed(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write_bits(path: &Path, bits: &BitString) -> Result<()> {
    fs::write(path, bits.to_length_prefixed())
        .with_context(|| format!("writing {}", path.display()))
}

fn read_container(path: &Path) -> Result<CompressedArtifact> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    CompressedArtifact::from_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write_container(path: &Path, artifact: &CompressedArtifact) -> Result<()> {
    fs::write(path, artifact.to_bytes()?).with_context(|| format!("writing {}", path.display()))
}

fn compress(input: &Path, output: &Path, epsilon: &ExactRational, mode: MapMode) -> Result<()> {
    let msg = read_bits(input)?;
    let artifact = encode(&msg, epsilon, mode)?;
    write_container(output, &artifact)?;

    let model = &artifact.model;
    let h = entropy_bits_per_symbol(model.zero_count, model.length)?;
    let r = redundancy_bits_per_symbol(epsilon)?;
    println!("symbols       {}", model.length);
    println!("p             {} ({:.6})", model.p(), model.p().to_f64());
    println!("epsilon       {epsilon}");
    println!("mode          {mode:?}");
    println!("payload bits  {}", artifact.payload.len());
    println!("H(p)          {h:.6} bits/symbol");
    println!("R(epsilon)    {r:.6} bits/symbol");
    match code_rate_exact(epsilon)? {
        Some(rate) => println!("rate          {rate}"),
        None => println!("rate          {:.6}", code_rate(epsilon)?),
    }
    Ok(())
}

fn decompress(input: &Path, output: &Path) -> Result<ExitCode> {
    let artifact = read_container(input)?;
    match decode(&artifact)? {
        DecodeOutcome::Success(msg) => {
            write_bits(output, &msg)?;
            println!("decoded {} symbols", msg.len());
            Ok(ExitCode::SUCCESS)
        }
        DecodeOutcome::Detected { symbol_index, .. } => {
            println!("error detected: forbidden symbol at symbol index {symbol_index}");
            Ok(ExitCode::from(EXIT_DETECTED))
        }
    }
}

fn corrupt(input: &Path, output: &Path, distance: usize) -> Result<()> {
    let artifact = read_container(input)?;
    let flipped = noise_lab::flip_bit(&artifact, distance)?;
    write_container(output, &flipped)?;
    println!(
        "flipped payload bit {} of {} (distance {distance} from end)",
        artifact.payload.len() - distance + 1,
        artifact.payload.len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    p: ExactRational,
    n: usize,
    epsilons: Vec<ExactRational>,
    seed: u64,
    d_max: usize,
    mode: MapMode,
    out: Option<&Path>,
    json: Option<&Path>,
) -> Result<()> {
    let cfg = TableConfig {
        mode,
        d_max,
        bins: noise_lab::bins_for(d_max),
        ..TableConfig::new(p, n, epsilons, seed)
    };
    let reports = noise_lab::run_table(&cfg)?;
    if let Some(path) = out {
        let file =
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        noise_lab::write_csv(&reports, std::io::BufWriter::new(file))?;
    }
    if let Some(path) = json {
        fs::write(path, noise_lab::to_json(&reports)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }

    print!("{:>12}", "distance");
    for r in &reports {
        print!(" | eps={:<8} det  und", r.epsilon.to_f64());
    }
    println!();
    for (i, bin) in reports[0].bins.iter().enumerate() {
        print!("{:>12}", format!("{}-{}", bin.first, bin.last));
        for r in &reports {
            let b = &r.bins[i];
            print!(" | {:>13}{:>5}", b.detected, b.undetected);
        }
        println!();
    }
    print!("{:>12}", "total");
    for r in &reports {
        print!(" | {:>13}{:>5}", r.detected, r.undetected);
    }
    println!();
    println!("{}", noise_lab::summary_line(&reports));
    Ok(())
}

fn cantor_dim(n: usize, k: u32, list: bool) -> Result<()> {
    let params = RepetitionParams::new(n)?;
    let approx = cantor_approx(params, k);
    println!("n             {n}");
    println!("depth k       {k}");
    println!("intervals     {}", approx.intervals.len());
    println!("measure       {}", approx.measure());
    if k > 0 {
        println!("dimension     {}", box_counting_dimension(params, k)?);
    }
    if let Some(rate) = code_rate_exact(&params.forbidden_width())? {
        println!("code rate     {rate}");
    }
    if list {
        for iv in &approx.intervals {
            println!("[{}, {})", iv.low, iv.high);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Compress {
            input,
            output,
            epsilon,
            mode,
        } => compress(&input, &output, &epsilon, mode)?,
        Command::Decompress { input, output } => return decompress(&input, &output),
        Command::Corrupt {
            input,
            output,
            distance,
        } => corrupt(&input, &output, distance)?,
        Command::Random { output, p, n, seed } => {
            let msg = noise_lab::random_message(&p, n, seed)?;
            write_bits(&output, &msg)?;
            println!("wrote {} symbols, {} zeros", msg.len(), msg.count_zeros());
        }
        Command::RepEncode { input, output, n } => {
            let params = RepetitionParams::new(n)?;
            write_bits(&output, &rep_encode(&read_bits(&input)?, params))?;
        }
        Command::RepDecode { input, output, n } => {
            let params = RepetitionParams::new(n)?;
            let (msg, corrected) = rep_decode_majority(&read_bits(&input)?, params)?;
            write_bits(&output, &msg)?;
            println!("decoded {} bits, {corrected} blocks corrected", msg.len());
        }
        Command::Experiment {
            p,
            n,
            epsilons,
            seed,
            d_max,
            mode,
            out,
            json,
        } => experiment(
            p,
            n,
            epsilons,
            seed,
            d_max,
            mode,
            out.as_deref(),
            json.as_deref(),
        )?,
        Command::CantorDim { n, k, intervals } => cantor_dim(n, k, intervals)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
