//! Browser bindings for the interactive demo page in `www/`.
//!
//! Every export takes plain strings and numbers and returns a JSON document,
//! or an error message on bad input.

use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

use gls_cantor::codec::{code_rate, code_rate_exact, redundancy_bits_per_symbol};
use gls_cantor::noise_lab::{self, TableConfig, TrialConfig};
use gls_cantor::repetition::{box_counting_dimension, cantor_approx, RepetitionParams};
use gls_cantor::{ExactRational, MapMode};

/// Largest message length accepted from the page.
const MAX_LENGTH: usize = 20_000;
/// Largest depth drawn by the page; depth `k` has `2^k` intervals.
const MAX_DEPTH: u32 = 12;

type JsResult = Result<String, String>;

fn parse<T: std::str::FromStr>(what: &str, s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| format!("{what}: {e}"))
}

fn to_json<T: Serialize>(value: &T) -> JsResult {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn check_length(length: usize) -> Result<(), String> {
    if length == 0 || length > MAX_LENGTH {
        return Err(format!("length must be in 1..={MAX_LENGTH}"));
    }
    Ok(())
}

#[derive(Serialize)]
struct CantorView {
    n: usize,
    k: u32,
    /// `[low, high)` pairs as floats, for drawing only.
    intervals: Vec<[f64; 2]>,
    measure: String,
    dimension: Option<String>,
    forbidden_width: String,
    code_rate: Option<String>,
}

/// Level-`k` approximation of the Cantor set cut out by the length-`n`
/// repetition code.
#[wasm_bindgen]
pub fn cantor_set(n: usize, k: u32) -> JsResult {
    let params = RepetitionParams::new(n).map_err(|e| e.to_string())?;
    if k > MAX_DEPTH {
        return Err(format!("depth must be at most {MAX_DEPTH}"));
    }
    let approx = cantor_approx(params, k);
    let width = params.forbidden_width();
    to_json(&CantorView {
        n,
        k,
        intervals: approx
            .intervals
            .iter()
            .map(|iv| [iv.low.to_f64(), iv.high.to_f64()])
            .collect(),
        measure: approx.measure().to_string(),
        dimension: if k == 0 {
            None
        } else {
            Some(
                box_counting_dimension(params, k)
                    .map_err(|e| e.to_string())?
                    .to_string(),
            )
        },
        code_rate: code_rate_exact(&width)
            .map_err(|e| e.to_string())?
            .map(|r| r.to_string()),
        forbidden_width: width.to_string(),
    })
}

#[derive(Serialize)]
struct FlipView {
    length: usize,
    payload_len: usize,
    redundancy_bits_per_symbol: f64,
    code_rate: f64,
    outcome: &'static str,
    symbol_index: Option<u64>,
    prefix_match_symbols: usize,
}

/// Encodes a random message, flips the payload bit `distance` places from
/// the end and decodes it again.
#[wasm_bindgen]
pub fn flip_trial(
    p: &str,
    length: usize,
    epsilon: &str,
    mode: &str,
    seed: u64,
    distance: usize,
) -> JsResult {
    check_length(length)?;
    let cfg = TrialConfig {
        p_target: parse("p", p)?,
        length,
        epsilon: parse("epsilon", epsilon)?,
        mode: parse("mode", mode)?,
        distance,
        seed,
    };
    let result = noise_lab::run_trial(&cfg).map_err(|e| e.to_string())?;
    to_json(&FlipView {
        length,
        payload_len: result.payload_len,
        redundancy_bits_per_symbol: redundancy_bits_per_symbol(&cfg.epsilon)
            .map_err(|e| e.to_string())?,
        code_rate: code_rate(&cfg.epsilon).map_err(|e| e.to_string())?,
        outcome: result.outcome.label(),
        symbol_index: result.outcome.symbol_index(),
        prefix_match_symbols: result.prefix_match_symbols,
    })
}

#[derive(Serialize)]
struct SweepRow {
    epsilon: String,
    percent_detected: f64,
    /// `(first, last, detected, undetected)` per distance bin.
    bins: Vec<(usize, usize, usize, usize)>,
}

/// Detection rates for one flip at every distance `1..=d_max` from the end of
/// the payload, one row per comma-separated epsilon.
#[wasm_bindgen]
pub fn detection_sweep(
    p: &str,
    length: usize,
    epsilons: &str,
    d_max: usize,
    mode: &str,
    seed: u64,
) -> JsResult {
    check_length(length)?;
    let epsilons = epsilons
        .split(',')
        .map(|e| parse::<ExactRational>("epsilon", e))
        .collect::<Result<Vec<_>, _>>()?;
    let mode: MapMode = parse("mode", mode)?;
    let cfg = TableConfig {
        mode,
        d_max,
        bins: noise_lab::bins_for(d_max),
        ..TableConfig::new(parse("p", p)?, length, epsilons, seed)
    };
    let reports = noise_lab::run_table(&cfg).map_err(|e| e.to_string())?;
    let rows: Vec<SweepRow> = reports
        .iter()
        .map(|r| SweepRow {
            epsilon: r.epsilon.to_string(),
            percent_detected: r.percent_detected,
            bins: r
                .bins
                .iter()
                .map(|b| (b.first, b.last, b.detected, b.undetected))
                .collect(),
        })
        .collect();
    to_json(&rows)
}
