//! Scaled-integer form of interval refinement and point iteration.
//!
//! Every quantity is kept as a big integer over an implicit denominator
//! (`total^depth` while encoding, `2^L * prod(weights)` while decoding), so a
//! step costs a few big-by-small multiplications and no gcd reductions. The
//! results are identical to folding [`crate::gls_model::refine_interval`] and
//! [`crate::gls_model::forward_iterate`] over exact rationals.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gls_model::{BranchWeights, CodingInterval, SymbolKind};
use crate::numerics::{ceil_log2_ratio, BitString, DyadicFraction, ExactRational};

use super::DecodeOutcome;

/// `[low_num, low_num + width_num) / total^depth`.
#[derive(Clone, Debug)]
pub(crate) struct ScaledInterval {
    low_num: BigUint,
    width_num: BigUint,
    depth: u32,
    flipped: bool,
}

impl ScaledInterval {
    pub(crate) fn unit() -> Self {
        Self {
            low_num: BigUint::zero(),
            width_num: BigUint::one(),
            depth: 0,
            flipped: false,
        }
    }

    pub(crate) fn refine(&mut self, s: SymbolKind, w: &BranchWeights) -> Result<()> {
        let weight = w.weight(s);
        if weight.is_zero() {
            return Err(Error::DegenerateBranch(s));
        }
        let offset = if self.flipped {
            w.total() - w.offset(s) - weight
        } else {
            w.offset(s).clone()
        };
        self.low_num *= w.total();
        self.low_num += &self.width_num * offset;
        self.width_num *= weight;
        self.depth = self
            .depth
            .checked_add(1)
            .ok_or_else(|| Error::Config("message too long".into()))?;
        self.flipped ^= !w.ascending(s);
        Ok(())
    }

    pub(crate) fn denominator(&self, w: &BranchWeights) -> BigUint {
        w.total().pow(self.depth)
    }

    pub(crate) fn to_interval(&self, w: &BranchWeights) -> CodingInterval {
        let den = BigInt::from(self.denominator(w));
        let low = BigInt::from(self.low_num.clone());
        let high = &low + BigInt::from(self.width_num.clone());
        CodingInterval {
            low: ExactRational::new(low, den.clone()).expect("positive denominator"),
            high: ExactRational::new(high, den).expect("positive denominator"),
            flipped: self.flipped,
        }
    }

    pub(crate) fn emit(&self, w: &BranchWeights, strict_low: bool) -> BitString {
        emit_fraction(
            &self.low_num,
            &self.width_num,
            &self.denominator(w),
            strict_low,
        )
    }
}

/// Midpoint emission for `[low, low + width) / den`.
///
/// Takes `L0 = ceil(-log2(width/den))` bits of the truncated midpoint when
/// that value is not below `low` (strictly above it when `strict_low`), and
/// `L0 + 1` bits otherwise. The result always lies strictly below the high
/// end, and with `L0 + 1` bits strictly above `low`.
pub(crate) fn emit_fraction(
    low: &BigUint,
    width: &BigUint,
    den: &BigUint,
    strict_low: bool,
) -> BitString {
    let base = ceil_log2_ratio(width, den);
    let mid_num = (low << 1u32) + width;
    let mid_den = den << 1u32;
    for k in [base, base + 1] {
        let trunc = (&mid_num << k) / &mid_den;
        let lhs = &trunc * den;
        let rhs = low << k;
        if lhs > rhs || (!strict_low && lhs == rhs) {
            return DyadicFraction::new(trunc, k)
                .expect("truncated midpoint is below 1")
                .to_bits();
        }
    }
    unreachable!("L0 + 1 bits always land strictly inside the interval")
}

/// Forward iteration of the point `payload` for `n` symbols.
pub(crate) fn iterate_point(payload: &BitString, w: &BranchWeights, n: u64) -> DecodeOutcome {
    let start = DyadicFraction::from_bits(payload);
    let mut num = start.mantissa().clone();
    let mut den = BigUint::one() << start.precision_bits();
    let mut decoded = BitString::with_capacity(usize::try_from(n).unwrap_or(0));
    let forbidden_edge = w.offset(SymbolKind::Forbidden);
    let one_edge = w.offset(SymbolKind::One);

    for index in 0..n {
        num *= w.total();
        // Branch edges scaled to the current denominator.
        let forbidden_at = forbidden_edge * &den;
        let (s, low_edge) = if num < forbidden_at {
            (SymbolKind::Zero, BigUint::zero())
        } else {
            let one_at = one_edge * &den;
            if num < one_at {
                (SymbolKind::Forbidden, forbidden_at)
            } else {
                (SymbolKind::One, one_at)
            }
        };
        let Some(bit) = s.to_bit() else {
            return DecodeOutcome::Detected {
                symbol_index: index,
                prefix: decoded,
            };
        };
        decoded.push(bit);

        let weight = w.weight(s);
        if w.ascending(s) {
            num -= low_edge;
        } else {
            num = low_edge + weight * &den - num;
        }
        den *= weight;
        // Left end of a descending branch maps to 1, identified with 0.
        if num == den {
            num.set_zero();
        }
    }
    DecodeOutcome::Success(decoded)
}
