//! Repetition codes and the Cantor sets their codewords live on.
//!
//! `R_n` repeats every bit `n` times. Read as binary fractions, its codewords
//! are exactly the points that survive recursively deleting the middle
//! `1 - 2^(1-n)` of every interval, which is also GLS-coding with a forbidden
//! branch of that width and `p = 1/2`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::codec::encode_payload;
use crate::error::{Error, Result};
use crate::gls_model::{make_partition, CodingInterval, MapMode};
use crate::numerics::{BitString, DyadicFraction, ExactRational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RepetitionParams {
    n: usize,
}

impl RepetitionParams {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "repetition factor must be a positive odd integer, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn n(self) -> usize {
        self.n
    }

    /// Width of the removed middle, `1 - 2^(1-n)`.
    pub fn forbidden_width(self) -> ExactRational {
        ExactRational::one() - ExactRational::pow2_neg(self.n as u64 - 1)
    }
}

pub fn rep_encode(msg: &BitString, params: RepetitionParams) -> BitString {
    msg.iter()
        .flat_map(|b| std::iter::repeat_n(b, params.n))
        .collect()
}

/// Majority vote per block. Also returns how many blocks were not uniform.
pub fn rep_decode_majority(
    code: &BitString,
    params: RepetitionParams,
) -> Result<(BitString, usize)> {
    let n = params.n;
    if !code.len().is_multiple_of(n) {
        return Err(Error::Framing {
            len: code.len(),
            block: n,
        });
    }
    let mut corrected = 0;
    let decoded = code
        .as_slice()
        .chunks(n)
        .map(|block| {
            let ones = block.iter().filter(|b| **b).count();
            if ones != 0 && ones != n {
                corrected += 1;
            }
            ones > n / 2
        })
        .collect();
    Ok((decoded, corrected))
}

/// Encodes through the GLS codec with branch widths `2^-n`, `1 - 2^(1-n)`,
/// `2^-n`. The output equals [`rep_encode`].
pub fn rep_encode_via_gls(msg: &BitString, params: RepetitionParams) -> Result<BitString> {
    if msg.is_empty() {
        return Err(Error::DegenerateInput("empty message".into()));
    }
    let half = ExactRational::ratio(1, 2);
    let part = make_partition(&half, &params.forbidden_width(), MapMode::Binary)?;
    encode_payload(msg, &part)
}

/// Depth-`k` approximation of the `R_n` Cantor set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CantorApprox {
    pub n: usize,
    pub depth: u32,
    pub intervals: Vec<CodingInterval>,
}

impl CantorApprox {
    /// Total length, `2^k * 2^(-nk)`.
    pub fn measure(&self) -> ExactRational {
        self.intervals
            .iter()
            .fold(ExactRational::zero(), |acc, iv| acc + iv.width())
    }
}

/// Keeps the first and last `2^-n` of every interval, `k` times over.
pub fn cantor_approx(params: RepetitionParams, k: u32) -> CantorApprox {
    let edge = ExactRational::pow2_neg(params.n as u64);
    let mut intervals = vec![CodingInterval::unit()];
    for _ in 0..k {
        intervals = intervals
            .into_iter()
            .flat_map(|iv| {
                let keep = iv.width() * &edge;
                let left = CodingInterval {
                    low: iv.low.clone(),
                    high: &iv.low + &keep,
                    flipped: false,
                };
                let right = CodingInterval {
                    low: &iv.high - &keep,
                    high: iv.high,
                    flipped: false,
                };
                [left, right]
            })
            .collect();
    }
    CantorApprox {
        n: params.n,
        depth: k,
        intervals,
    }
}

/// Whether `x` survives `k` rounds of middle removal.
///
/// Equivalent to its first `n*k` binary digits (zero-extended) splitting into
/// `k` uniform blocks of length `n`.
pub fn cantor_member(x: &DyadicFraction, params: RepetitionParams, k: u32) -> bool {
    let bits = x.to_bits();
    let digit = |i: usize| bits.get(i).unwrap_or(false);
    let n = params.n;
    (0..k as usize).all(|block| {
        let first = digit(block * n);
        (1..n).all(|j| digit(block * n + j) == first)
    })
}

/// Number of grid boxes of size `2^-box_exp` that meet the depth-`k` set.
pub fn box_count(params: RepetitionParams, k: u32, box_exp: u32) -> BigUint {
    let scale = ExactRational::integer(BigUint::one() << box_exp);
    let mut boxes: Vec<(BigUint, BigUint)> = cantor_approx(params, k)
        .intervals
        .iter()
        .map(|iv| {
            let first = (&iv.low * &scale).floor();
            let hi = &iv.high * &scale;
            let last_excl = -(-hi).floor();
            (
                first.to_biguint().expect("non-negative"),
                last_excl.to_biguint().expect("non-negative"),
            )
        })
        .collect();
    boxes.sort();
    let mut count = BigUint::zero();
    let mut covered_to = BigUint::zero();
    for (start, end) in boxes {
        let start = start.max(covered_to.clone());
        if end > start {
            count += &end - &start;
            covered_to = end;
        }
    }
    count
}

/// `log N(delta) / log(1/delta)` at `delta = 2^(-nk)`, computed exactly.
///
/// The set is self-similar, so every `k >= 1` already gives the limit `1/n`.
pub fn box_counting_dimension(params: RepetitionParams, k: u32) -> Result<ExactRational> {
    if k == 0 {
        return Err(Error::Config("box counting needs depth k >= 1".into()));
    }
    let box_exp = params.n as u32 * k;
    let count = box_count(params, k, box_exp);
    if count.count_ones() != 1 {
        return Err(Error::Domain(format!(
            "box count {count} is not a power of two"
        )));
    }
    let log_count = count.bits() - 1;
    ExactRational::new(log_count, u64::from(box_exp))
}
