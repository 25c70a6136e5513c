//! Single-bit-flip experiments on compressed payloads.
//!
//! A trial draws an i.i.d. message, compresses it, inverts one payload bit at
//! a given distance from the end, and decodes. A table run does one trial per
//! distance `1..=d_max` for each epsilon and bins the outcomes by distance.
//!
//! Every trial owns its seed, derived from the table seed, the epsilon index
//! and the distance, so results never depend on scheduling.

use std::io::Write;
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::codec::{
    decode, encode, entropy_bits_per_symbol, redundancy_bits_per_symbol, CompressedArtifact,
    DecodeOutcome,
};
use crate::error::{Error, Result};
use crate::gls_model::MapMode;
use crate::numerics::{BitString, ExactRational};

/// Draws `length` bits, each 0 with probability `p_target`.
///
/// The generator is ChaCha8 seeded with `seed`. A bit is 0 iff the next
/// `u64` draw `r` satisfies `r / 2^64 < p_target`, evaluated exactly.
pub fn random_message(p_target: &ExactRational, length: usize, seed: u64) -> Result<BitString> {
    if p_target.is_zero() || p_target.is_negative() || *p_target >= ExactRational::one() {
        return Err(Error::DegenerateSource(format!(
            "p = {p_target} must lie in (0, 1)"
        )));
    }
    let scaled = p_target * ExactRational::integer(BigUint::from(1u8) << 64u32);
    // r < p * 2^64  <=>  r < ceil(p * 2^64) for integer r
    let threshold = (-(-scaled).floor())
        .to_u128()
        .expect("p * 2^64 fits in u128");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..length)
        .map(|_| u128::from(rng.next_u64()) >= threshold)
        .collect())
}

/// Returns a copy with the payload bit at `distance` from the end inverted.
pub fn flip_bit(artifact: &CompressedArtifact, distance: usize) -> Result<CompressedArtifact> {
    let mut out = artifact.clone();
    out.payload.flip_from_end(distance)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialConfig {
    pub p_target: ExactRational,
    pub length: usize,
    pub epsilon: ExactRational,
    pub mode: MapMode,
    /// Distance of the flipped bit from the end of the payload; 1 is the last bit.
    pub distance: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialOutcome {
    DetectedAt(u64),
    UndetectedWrong,
    /// The flip left the payload inside the original interval.
    UndetectedCorrect,
}

impl TrialOutcome {
    pub fn is_detected(self) -> bool {
        matches!(self, TrialOutcome::DetectedAt(_))
    }

    pub fn label(self) -> &'static str {
        match self {
            TrialOutcome::DetectedAt(_) => "detected",
            TrialOutcome::UndetectedWrong => "undetected_wrong",
            TrialOutcome::UndetectedCorrect => "undetected_correct",
        }
    }

    pub fn symbol_index(self) -> Option<u64> {
        match self {
            TrialOutcome::DetectedAt(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub outcome: TrialOutcome,
    /// Length of the longest decoded prefix that agrees with the message.
    pub prefix_match_symbols: usize,
    pub payload_len: usize,
}

/// Classifies the decode of a corrupted artifact against the original message.
pub fn classify(original: &BitString, outcome: &DecodeOutcome, payload_len: usize) -> TrialResult {
    let prefix_match_symbols = outcome.decoded().common_prefix_len(original);
    let outcome = match outcome {
        DecodeOutcome::Detected { symbol_index, .. } => TrialOutcome::DetectedAt(*symbol_index),
        DecodeOutcome::Success(m) if m == original => TrialOutcome::UndetectedCorrect,
        DecodeOutcome::Success(_) => TrialOutcome::UndetectedWrong,
    };
    TrialResult {
        outcome,
        prefix_match_symbols,
        payload_len,
    }
}

pub fn run_trial(cfg: &TrialConfig) -> Result<TrialResult> {
    if cfg.length == 0 {
        return Err(Error::Config("message length must be at least 1".into()));
    }
    let msg = random_message(&cfg.p_target, cfg.length, cfg.seed)?;
    let artifact = encode(&msg, &cfg.epsilon, cfg.mode)?;
    let corrupted = flip_bit(&artifact, cfg.distance)?;
    let outcome = decode(&corrupted)?;
    Ok(classify(&msg, &outcome, artifact.payload.len()))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the trial at `distance` for the `epsilon_index`-th epsilon.
pub fn trial_seed(table_seed: u64, epsilon_index: usize, distance: usize) -> u64 {
    splitmix64(splitmix64(table_seed ^ splitmix64(epsilon_index as u64)) ^ distance as u64)
}

/// Distance bins used by the published tables.
pub fn default_bins() -> Vec<RangeInclusive<usize>> {
    vec![1..=50, 51..=100, 101..=150, 151..=250]
}

/// The published bins when `d_max = 250`, otherwise consecutive bins of 50.
pub fn bins_for(d_max: usize) -> Vec<RangeInclusive<usize>> {
    if d_max == 250 {
        return default_bins();
    }
    (1..=d_max)
        .step_by(50)
        .map(|first| first..=(first + 49).min(d_max))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableConfig {
    pub p_target: ExactRational,
    pub length: usize,
    pub epsilons: Vec<ExactRational>,
    pub mode: MapMode,
    pub d_max: usize,
    /// Contiguous, covering `1..=d_max`.
    pub bins: Vec<RangeInclusive<usize>>,
    pub seed: u64,
}

impl TableConfig {
    pub fn new(
        p_target: ExactRational,
        length: usize,
        epsilons: Vec<ExactRational>,
        seed: u64,
    ) -> Self {
        Self {
            p_target,
            length,
            epsilons,
            mode: MapMode::Tent,
            d_max: 250,
            bins: default_bins(),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d_max == 0 {
            return Err(Error::Config("d_max must be at least 1".into()));
        }
        let mut next = 1;
        for bin in &self.bins {
            if *bin.start() != next || bin.end() < bin.start() {
                return Err(Error::Config(format!(
                    "bin {}-{} does not continue from {next}",
                    bin.start(),
                    bin.end()
                )));
            }
            next = bin.end() + 1;
        }
        if next != self.d_max + 1 {
            return Err(Error::Config(format!(
                "bins cover 1..{} but d_max is {}",
                next - 1,
                self.d_max
            )));
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub epsilon: ExactRational,
    pub d: usize,
    pub seed: u64,
    pub outcome: String,
    pub symbol_index: Option<u64>,
    pub prefix_match_symbols: usize,
    pub payload_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinCount {
    pub first: usize,
    pub last: usize,
    pub detected: usize,
    pub undetected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub p_target: ExactRational,
    pub length: usize,
    pub epsilon: ExactRational,
    pub mode: MapMode,
    pub bins: Vec<BinCount>,
    pub trials: usize,
    pub detected: usize,
    /// Includes `undetected_correct`.
    pub undetected: usize,
    pub undetected_correct: usize,
    pub percent_detected: f64,
    pub records: Vec<TrialRecord>,
}

impl ExperimentReport {
    fn from_records(cfg: &TableConfig, epsilon: &ExactRational, records: Vec<TrialRecord>) -> Self {
        let bins = cfg
            .bins
            .iter()
            .map(|bin| {
                let in_bin = records.iter().filter(|r| bin.contains(&r.d));
                let (detected, undetected) = in_bin.fold((0, 0), |(d, u), r| {
                    if r.symbol_index.is_some() {
                        (d + 1, u)
                    } else {
                        (d, u + 1)
                    }
                });
                BinCount {
                    first: *bin.start(),
                    last: *bin.end(),
                    detected,
                    undetected,
                }
            })
            .collect();
        let trials = records.len();
        let detected = records.iter().filter(|r| r.symbol_index.is_some()).count();
        let undetected_correct = records
            .iter()
            .filter(|r| r.outcome == TrialOutcome::UndetectedCorrect.label())
            .count();
        Self {
            p_target: cfg.p_target.clone(),
            length: cfg.length,
            epsilon: epsilon.clone(),
            mode: cfg.mode,
            bins,
            trials,
            detected,
            undetected: trials - detected,
            undetected_correct,
            percent_detected: if trials == 0 {
                0.0
            } else {
                detected as f64 / trials as f64 * 100.0
            },
            records,
        }
    }
}

fn run_one(
    cfg: &TableConfig,
    eps_index: usize,
    epsilon: &ExactRational,
    d: usize,
) -> Result<TrialRecord> {
    let seed = trial_seed(cfg.seed, eps_index, d);
    let trial = TrialConfig {
        p_target: cfg.p_target.clone(),
        length: cfg.length,
        epsilon: epsilon.clone(),
        mode: cfg.mode,
        distance: d,
        seed,
    };
    let result = run_trial(&trial).map_err(|e| match e {
        Error::OutOfRange { max, .. } => Error::Config(format!(
            "payload of {max} bits is shorter than d_max = {}",
            cfg.d_max
        )),
        other => other,
    })?;
    Ok(TrialRecord {
        epsilon: epsilon.clone(),
        d,
        seed,
        outcome: result.outcome.label().to_string(),
        symbol_index: result.outcome.symbol_index(),
        prefix_match_symbols: result.prefix_match_symbols,
        payload_len: result.payload_len,
    })
}

/// One report per epsilon, each with one trial per distance `1..=d_max`.
pub fn run_table(cfg: &TableConfig) -> Result<Vec<ExperimentReport>> {
    cfg.validate()?;
    cfg.epsilons
        .iter()
        .enumerate()
        .map(|(i, eps)| {
            let distances = 1..=cfg.d_max;
            #[cfg(feature = "parallel")]
            let records: Result<Vec<_>> = {
                use rayon::prelude::*;
                distances
                    .into_par_iter()
                    .map(|d| run_one(cfg, i, eps, d))
                    .collect()
            };
            #[cfg(not(feature = "parallel"))]
            let records: Result<Vec<_>> = distances.map(|d| run_one(cfg, i, eps, d)).collect();
            Ok(ExperimentReport::from_records(cfg, eps, records?))
        })
        .collect()
}

/// CSV with columns `epsilon,d,seed,outcome,symbol_index,prefix_match_symbols,payload_len`.
pub fn write_csv<W: Write>(reports: &[ExperimentReport], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Config(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    for record in reports.iter().flat_map(|r| &r.records) {
        w.serialize(record).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("writing CSV: {e}")))
}

pub fn to_json(reports: &[ExperimentReport]) -> Result<String> {
    serde_json::to_string_pretty(reports).map_err(|e| Error::Config(format!("encoding JSON: {e}")))
}

/// Percent detected per epsilon in the layout of the published summary table.
pub fn summary_line(reports: &[ExperimentReport]) -> String {
    let mut line = format!(
        "p = {}",
        reports.first().map(|r| r.p_target.to_f64()).unwrap_or(0.0)
    );
    for r in reports {
        line.push_str(&format!(
            " | eps = {}: {:.1} %",
            r.epsilon.to_f64(),
            r.percent_detected
        ));
    }
    line
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedundancyRow {
    pub epsilon: ExactRational,
    /// `ceil(N * R(eps))`.
    pub redundancy_bits: u64,
    /// `ceil(N * H(p)) + redundancy_bits`.
    pub predicted_file_bits: u64,
}

/// Redundancy cost of each epsilon for `length` symbols at zero-probability `p`.
pub fn redundancy_table(
    length: u64,
    p: &ExactRational,
    epsilons: &[ExactRational],
) -> Result<Vec<RedundancyRow>> {
    if p.is_zero() || !p.in_unit_interval() {
        return Err(Error::DegenerateSource(format!(
            "p = {p} must lie in (0, 1)"
        )));
    }
    let pf = p.to_f64();
    let entropy = -pf * pf.log2() - (1.0 - pf) * (1.0 - pf).log2();
    let base = (length as f64 * entropy).ceil() as u64;
    epsilons
        .iter()
        .map(|eps| {
            let redundancy_bits = (length as f64 * redundancy_bits_per_symbol(eps)?).ceil() as u64;
            Ok(RedundancyRow {
                epsilon: eps.clone(),
                redundancy_bits,
                predicted_file_bits: base + redundancy_bits,
            })
        })
        .collect()
}

/// Payload bits predicted by `ceil(N * (H(p) + R(eps)))` for a message with the given counts.
pub fn predicted_payload_bits(
    zero_count: u64,
    length: u64,
    epsilon: &ExactRational,
) -> Result<u64> {
    let h = entropy_bits_per_symbol(zero_count, length)?;
    let r = redundancy_bits_per_symbol(epsilon)?;
    Ok((length as f64 * (h + r)).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{final_interval, SourceModel};
    use crate::numerics::DyadicFraction;

    fn r(n: i64, d: i64) -> ExactRational {
        ExactRational::ratio(n, d)
    }

    #[test]
    fn messages_are_reproducible() {
        let a = random_message(&r(1, 2), 4, 7).unwrap();
        assert_eq!(a, random_message(&r(1, 2), 4, 7).unwrap());
        assert_eq!(a.len(), 4);
        let x = random_message(&r(1, 2), 256, 1).unwrap();
        let y = random_message(&r(1, 2), 256, 2).unwrap();
        assert_ne!(x, y);
        assert!(random_message(&r(0, 1), 4, 0).is_err());
        assert!(random_message(&r(1, 1), 4, 0).is_err());
    }

    #[test]
    fn zero_counts_follow_binomial() {
        // sd = sqrt(10000 * 0.09) = 30, so [850, 1150] is +-5 sd.
        let inside = (0..200u64)
            .filter(|&s| {
                let z = random_message(&r(1, 10), 10_000, s).unwrap().count_zeros();
                (850..=1150).contains(&z)
            })
            .count();
        assert!(inside >= 198, "{inside}/200");
    }

    #[test]
    fn flip_examples() {
        let art = CompressedArtifact {
            model: SourceModel::new(2, 4, r(0, 1), MapMode::Binary).unwrap(),
            payload: "0110".parse().unwrap(),
        };
        assert_eq!(flip_bit(&art, 1).unwrap().payload.to_string(), "0111");
        assert_eq!(flip_bit(&art, 4).unwrap().payload.to_string(), "1110");
        assert_eq!(flip_bit(&flip_bit(&art, 3).unwrap(), 3).unwrap(), art);
        assert_eq!(flip_bit(&art, 2).unwrap().model, art.model);
        assert!(flip_bit(&art, 0).is_err());
        assert!(flip_bit(&art, 5).is_err());
    }

    fn trial(p: ExactRational, n: usize, eps: ExactRational, d: usize, seed: u64) -> TrialConfig {
        TrialConfig {
            p_target: p,
            length: n,
            epsilon: eps,
            mode: MapMode::Tent,
            distance: d,
            seed,
        }
    }

    #[test]
    fn first_bit_flip_destroys_everything() {
        let probe = run_trial(&trial(r(1, 5), 2000, r(0, 1), 1, 3)).unwrap();
        let cfg = trial(r(1, 5), 2000, r(0, 1), probe.payload_len, 3);
        let res = run_trial(&cfg).unwrap();
        assert_eq!(res.outcome, TrialOutcome::UndetectedWrong);
        assert!(
            res.prefix_match_symbols < 20,
            "{}",
            res.prefix_match_symbols
        );
    }

    #[test]
    fn trials_are_deterministic() {
        let cfg = trial(r(1, 10), 600, r(1, 20), 40, 99);
        assert_eq!(run_trial(&cfg).unwrap(), run_trial(&cfg).unwrap());
    }

    #[test]
    fn classification_is_sound() {
        for seed in 0..40 {
            let cfg = trial(r(3, 10), 300, r(3, 100), 1 + (seed as usize % 30), seed);
            let msg = random_message(&cfg.p_target, cfg.length, seed).unwrap();
            let art = encode(&msg, &cfg.epsilon, cfg.mode).unwrap();
            let bad = flip_bit(&art, cfg.distance).unwrap();
            let res = run_trial(&cfg).unwrap();
            let iv = final_interval(&msg, &art.model.partition().unwrap()).unwrap();
            let x = DyadicFraction::from_bits(&bad.payload).to_rational();
            match res.outcome {
                TrialOutcome::DetectedAt(_) => assert!(decode(&bad).unwrap().is_detected()),
                TrialOutcome::UndetectedCorrect => assert!(iv.contains(&x)),
                TrialOutcome::UndetectedWrong => assert!(!iv.contains_interior(&x)),
            }
            assert!(res.prefix_match_symbols <= cfg.length);
        }
    }

    #[test]
    fn prefix_survival_lower_bound() {
        // With eps = 0, the first k symbols survive whenever the whole dyadic
        // block shared by the clean and corrupted payloads sits inside the
        // cylinder of those k symbols.
        for seed in 0..6u64 {
            let msg = random_message(&r(1, 5), 200, seed).unwrap();
            let art = encode(&msg, &r(0, 1), MapMode::Binary).unwrap();
            let part = art.model.partition().unwrap();
            let len = art.payload.len();
            for d in [len / 4, len / 2, 3 * len / 4] {
                let shared = len - d;
                let block_low = DyadicFraction::from_bits(
                    &art.payload.iter().take(shared).collect::<BitString>(),
                )
                .to_rational();
                let block_high = &block_low + &ExactRational::pow2_neg(shared as u64);
                let determined = (0..=msg.len())
                    .take_while(|&k| {
                        let prefix: BitString = msg.iter().take(k).collect();
                        let iv = final_interval(&prefix, &part).unwrap();
                        iv.low <= block_low && block_high <= iv.high
                    })
                    .last()
                    .unwrap();
                let out = decode(&flip_bit(&art, d).unwrap()).unwrap();
                let res = classify(&msg, &out, len);
                assert!(
                    res.prefix_match_symbols >= determined,
                    "{} < {determined}",
                    res.prefix_match_symbols
                );
            }
        }
    }

    #[test]
    fn table_with_zero_epsilon_detects_nothing() {
        let mut cfg = TableConfig::new(r(3, 10), 400, vec![r(0, 1)], 5);
        cfg.d_max = 40;
        cfg.bins = vec![1..=20, 21..=40];
        let reports = run_table(&cfg).unwrap();
        assert_eq!(reports.len(), 1);
        let rep = &reports[0];
        assert_eq!(rep.detected, 0);
        assert_eq!(rep.percent_detected, 0.0);
        assert_eq!(rep.trials, 40);
        assert_eq!(
            rep.bins
                .iter()
                .map(|b| b.detected + b.undetected)
                .sum::<usize>(),
            40
        );
    }

    #[test]
    fn bins_cover_range() {
        assert_eq!(bins_for(250), default_bins());
        assert_eq!(bins_for(120), vec![1..=50, 51..=100, 101..=120]);
        assert_eq!(bins_for(7), vec![1..=7]);
    }

    #[test]
    fn table_config_errors() {
        let mut cfg = TableConfig::new(r(3, 10), 200, vec![r(1, 20)], 5);
        cfg.d_max = 100;
        assert!(matches!(run_table(&cfg), Err(Error::Config(_))));
        cfg.bins = vec![1..=50, 52..=100];
        assert!(matches!(run_table(&cfg), Err(Error::Config(_))));
        // 200 symbols at p = 0.3 compress to ~190 bits: too short for d = 250.
        let cfg = TableConfig::new(r(3, 10), 200, vec![r(1, 20)], 5);
        assert!(matches!(run_table(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn csv_and_json_reports() {
        let mut cfg = TableConfig::new(r(1, 10), 500, vec![r(1, 20), r(0, 1)], 11);
        cfg.d_max = 10;
        cfg.bins = vec![1..=5, 6..=10];
        let reports = run_table(&cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "epsilon,d,seed,outcome,symbol_index,prefix_match_symbols,payload_len"
        );
        assert_eq!(lines.count(), 20);
        assert!(text.contains("\n1/20,1,"));

        let mut again = Vec::new();
        write_csv(&run_table(&cfg).unwrap(), &mut again).unwrap();
        assert_eq!(text.as_bytes(), again.as_slice());

        let json: serde_json::Value = serde_json::from_str(&to_json(&reports).unwrap()).unwrap();
        assert_eq!(json[0]["epsilon"], "1/20");
        assert_eq!(json[0]["trials"], 10);
        assert_eq!(json[1]["detected"], 0);
    }

    #[test]
    fn redundancy_rows() {
        let eps = ["0.03", "0"].map(|s| s.parse::<ExactRational>().unwrap());
        let rows = redundancy_table(10_000, &r(1, 10), &eps).unwrap();
        assert_eq!(rows[0].redundancy_bits, 440);
        assert_eq!(rows[0].predicted_file_bits, 4690 + 440);
        assert_eq!(rows[1].redundancy_bits, 0);
        let rows = redundancy_table(20_000, &r(1, 10), &eps[..1]).unwrap();
        assert_eq!(rows[0].redundancy_bits, 879);
        assert!(redundancy_table(100, &r(0, 1), &eps).is_err());
    }
}
