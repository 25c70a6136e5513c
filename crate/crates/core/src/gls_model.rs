//! Piecewise-linear GLS map geometry.
//!
//! The unit interval is split into three branches, in order Zero, Forbidden,
//! One, with widths `(1-eps)p`, `eps` and `(1-eps)(1-p)`. Every branch is a
//! half-open interval `[low, low + width)`. In [`MapMode::Tent`] the One branch
//! is descending; everything else is ascending.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ExactRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    Zero,
    Forbidden,
    One,
}

impl SymbolKind {
    pub const ALL: [SymbolKind; 3] = [SymbolKind::Zero, SymbolKind::Forbidden, SymbolKind::One];

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            SymbolKind::One
        } else {
            SymbolKind::Zero
        }
    }

    /// `None` for the forbidden symbol.
    pub fn to_bit(self) -> Option<bool> {
        match self {
            SymbolKind::Zero => Some(false),
            SymbolKind::One => Some(true),
            SymbolKind::Forbidden => None,
        }
    }

    fn index(self) -> usize {
        match self {
            SymbolKind::Zero => 0,
            SymbolKind::Forbidden => 1,
            SymbolKind::One => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapMode {
    /// Every branch ascending (skew-binary map).
    #[default]
    Binary,
    /// One branch descending (skew-tent map).
    Tent,
}

impl MapMode {
    pub fn tag(self) -> u8 {
        match self {
            MapMode::Binary => 0,
            MapMode::Tent => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(MapMode::Binary),
            1 => Some(MapMode::Tent),
            _ => None,
        }
    }
}

impl std::str::FromStr for MapMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" => Ok(MapMode::Binary),
            "tent" => Ok(MapMode::Tent),
            _ => Err(Error::Parse(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub symbol: SymbolKind,
    pub low: ExactRational,
    pub width: ExactRational,
    pub ascending: bool,
}

impl Branch {
    pub fn high(&self) -> ExactRational {
        &self.low + &self.width
    }

    pub fn contains(&self, x: &ExactRational) -> bool {
        !self.width.is_zero() && self.low <= *x && *x < self.high()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlsPartition {
    branches: [Branch; 3],
    p: ExactRational,
    epsilon: ExactRational,
    mode: MapMode,
}

/// Builds the three-branch partition for zero-probability `p` and forbidden
/// width `epsilon`. `epsilon = 0` gives plain GLS-coding.
pub fn make_partition(
    p: &ExactRational,
    epsilon: &ExactRational,
    mode: MapMode,
) -> Result<GlsPartition> {
    if p.is_negative() || p.is_zero() || *p >= ExactRational::one() {
        return Err(Error::DegenerateSource(format!(
            "p = {p} must lie in (0, 1)"
        )));
    }
    if epsilon.is_negative() || *epsilon >= ExactRational::one() {
        return Err(Error::InvalidRedundancy(format!(
            "epsilon = {epsilon} must lie in [0, 1)"
        )));
    }
    let keep = ExactRational::one() - epsilon;
    let w_zero = &keep * p;
    let w_one = &keep * (ExactRational::one() - p);
    let low_forbidden = w_zero.clone();
    let low_one = &w_zero + epsilon;
    let tent = mode == MapMode::Tent;
    Ok(GlsPartition {
        branches: [
            Branch {
                symbol: SymbolKind::Zero,
                low: ExactRational::zero(),
                width: w_zero,
                ascending: true,
            },
            Branch {
                symbol: SymbolKind::Forbidden,
                low: low_forbidden,
                width: epsilon.clone(),
                ascending: true,
            },
            Branch {
                symbol: SymbolKind::One,
                low: low_one,
                width: w_one,
                ascending: !tent,
            },
        ],
        p: p.clone(),
        epsilon: epsilon.clone(),
        mode,
    })
}

/// Branch geometry over a common integer denominator: symbol `s` occupies
/// `[offset(s), offset(s) + weight(s)) / total`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchWeights {
    weights: [BigUint; 3],
    offsets: [BigUint; 3],
    ascending: [bool; 3],
    total: BigUint,
}

impl BranchWeights {
    pub fn weight(&self, s: SymbolKind) -> &BigUint {
        &self.weights[s.index()]
    }

    pub fn offset(&self, s: SymbolKind) -> &BigUint {
        &self.offsets[s.index()]
    }

    pub fn ascending(&self, s: SymbolKind) -> bool {
        self.ascending[s.index()]
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }
}

impl GlsPartition {
    pub fn branches(&self) -> &[Branch; 3] {
        &self.branches
    }

    pub fn branch(&self, s: SymbolKind) -> &Branch {
        &self.branches[s.index()]
    }

    pub fn width(&self, s: SymbolKind) -> &ExactRational {
        &self.branch(s).width
    }

    pub fn p(&self) -> &ExactRational {
        &self.p
    }

    pub fn epsilon(&self) -> &ExactRational {
        &self.epsilon
    }

    pub fn mode(&self) -> MapMode {
        self.mode
    }

    /// Rescales the branch widths to integers over their least common denominator.
    pub fn integer_weights(&self) -> BranchWeights {
        let total = self
            .branches
            .iter()
            .map(|b| b.width.denom().magnitude().clone())
            .fold(BigUint::one(), |acc, d| acc.lcm(&d));
        let weights = self.branches.clone().map(|b| {
            let scaled = b.width * ExactRational::integer(total.clone());
            scaled.numer().magnitude().clone()
        });
        let offsets = [
            BigUint::zero(),
            weights[0].clone(),
            &weights[0] + &weights[1],
        ];
        debug_assert_eq!(&offsets[2] + &weights[2], total);
        BranchWeights {
            ascending: self.branches.clone().map(|b| b.ascending),
            weights,
            offsets,
            total,
        }
    }
}

/// An interval of initial values sharing a symbolic prefix.
///
/// `flipped` records whether the map iterated over that prefix is decreasing
/// on the interval. Interior points always carry the prefix. In Binary mode
/// `low` does too; once a descending branch is involved the endpoints are not
/// reliable and only interior points should be used as codewords.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodingInterval {
    pub low: ExactRational,
    pub high: ExactRational,
    pub flipped: bool,
}

impl CodingInterval {
    pub fn unit() -> Self {
        Self {
            low: ExactRational::zero(),
            high: ExactRational::one(),
            flipped: false,
        }
    }

    pub fn new(low: ExactRational, high: ExactRational, flipped: bool) -> Result<Self> {
        if low.is_negative() || low >= high || high > ExactRational::one() {
            return Err(Error::Domain(format!(
                "[{low}, {high}) is not a valid interval"
            )));
        }
        Ok(Self { low, high, flipped })
    }

    pub fn width(&self) -> ExactRational {
        &self.high - &self.low
    }

    pub fn contains(&self, x: &ExactRational) -> bool {
        self.low <= *x && *x < self.high
    }

    pub fn contains_interior(&self, x: &ExactRational) -> bool {
        self.low < *x && *x < self.high
    }
}

/// Restricts `iv` to the initial values whose next symbol is `s`.
pub fn refine_interval(
    iv: &CodingInterval,
    s: SymbolKind,
    part: &GlsPartition,
) -> Result<CodingInterval> {
    let branch = part.branch(s);
    if branch.width.is_zero() {
        return Err(Error::DegenerateBranch(s));
    }
    let width = iv.width();
    let sub = &width * &branch.width;
    let (low, high) = if iv.flipped {
        let high = &iv.high - &width * &branch.low;
        (&high - &sub, high)
    } else {
        let low = &iv.low + &width * &branch.low;
        let high = &low + &sub;
        (low, high)
    };
    Ok(CodingInterval {
        low,
        high,
        flipped: iv.flipped ^ !branch.ascending,
    })
}

pub fn locate_symbol(x: &ExactRational, part: &GlsPartition) -> Result<SymbolKind> {
    if !x.in_unit_interval() {
        return Err(Error::Domain(format!("{x} is outside [0, 1)")));
    }
    part.branches
        .iter()
        .find(|b| b.contains(x))
        .map(|b| b.symbol)
        .ok_or_else(|| unreachable!("branches cover [0, 1)"))
}

/// One forward step of the map: the symbol of `x` and its image.
///
/// A descending branch sends its left endpoint to 1, which is identified with
/// 0 so the image stays in `[0, 1)`. Valid codewords never reach that point.
pub fn forward_iterate(
    x: &ExactRational,
    part: &GlsPartition,
) -> Result<(SymbolKind, ExactRational)> {
    let s = locate_symbol(x, part)?;
    let b = part.branch(s);
    let image = if b.ascending {
        (x - &b.low) / &b.width
    } else {
        (b.high() - x) / &b.width
    };
    let image = if image == ExactRational::one() {
        ExactRational::zero()
    } else {
        image
    };
    Ok((s, image))
}
