//! Exact arithmetic substrate: big rationals, dyadic fractions and bit strings.
//!
//! Nothing on the encode/decode path touches floating point. Floats appear only
//! in diagnostic conversions such as [`ExactRational::to_f64`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An arbitrary-precision fraction, always kept in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Self(BigRational::new(numer.into(), denom)))
    }

    /// Builds `numer / denom` from machine integers.
    ///
    /// Panics if `denom` is zero; use [`ExactRational::new`] for fallible input.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("zero denominator")
    }

    pub fn integer(value: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u64) -> Self {
        Self(BigRational::new(
            BigInt::one(),
            BigInt::one() << usize::try_from(k).expect("exponent fits usize"),
        ))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Always positive.
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// True when `0 <= self < 1`.
    pub fn in_unit_interval(&self) -> bool {
        !self.is_negative() && self.0 < BigRational::one()
    }

    pub fn recip(&self) -> Self {
        Self(self.0.recip())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Lossy conversion for diagnostics only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for ExactRational {
    fn from(value: BigRational) -> Self {
        Self(value)
    }
}

impl From<u64> for ExactRational {
    fn from(value: u64) -> Self {
        Self::integer(value)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&ExactRational> for &ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &ExactRational) -> ExactRational {
                ExactRational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &ExactRational) -> ExactRational {
                ExactRational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<ExactRational> for &ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `a/b`, plain integers, and decimals such as `0.03`, all converted
/// exactly (`"0.03"` is `3/100`, never the nearest double).
impl FromStr for ExactRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            return Self::new(n, d).map_err(|_| err());
        }
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let digits = format!("{int_part}{frac_part}");
        let mut numer: BigInt = digits.parse().map_err(|_| err())?;
        if negative {
            numer = -numer;
        }
        let denom = num_traits::pow(BigInt::from(10u8), frac_part.len());
        Self::new(numer, denom)
    }
}

impl Serialize for ExactRational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `zeros / total` in lowest terms: the empirical probability of a zero.
pub fn rational_from_counts(zeros: u64, total: u64) -> Result<ExactRational> {
    if total == 0 {
        return Err(Error::DegenerateInput("empty message (total = 0)".into()));
    }
    if zeros > total {
        return Err(Error::DegenerateInput(format!(
            "zero count {zeros} exceeds total {total}"
        )));
    }
    ExactRational::new(zeros, total)
}

/// A number `mantissa * 2^-precision_bits` in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicFraction {
    mantissa: BigUint,
    precision_bits: u64,
}

impl DyadicFraction {
    pub fn new(mantissa: BigUint, precision_bits: u64) -> Result<Self> {
        if mantissa.bits() > precision_bits {
            return Err(Error::Domain(format!(
                "mantissa does not fit in {precision_bits} bits"
            )));
        }
        Ok(Self {
            mantissa,
            precision_bits,
        })
    }

    /// Reads `0.b1 b2 ... bk`.
    pub fn from_bits(bits: &BitString) -> Self {
        let mut mantissa = BigUint::zero();
        for chunk in bits.to_packed().iter() {
            mantissa = (mantissa << 8u32) | BigUint::from(*chunk);
        }
        let pad = (8 - bits.len() % 8) % 8;
        mantissa >>= pad;
        Self {
            mantissa,
            precision_bits: bits.len() as u64,
        }
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn precision_bits(&self) -> u64 {
        self.precision_bits
    }

    pub fn to_rational(&self) -> ExactRational {
        let denom = BigInt::one() << usize::try_from(self.precision_bits).expect("fits usize");
        ExactRational::new(
            BigInt::from_biguint(Sign::Plus, self.mantissa.clone()),
            denom,
        )
        .expect("positive denominator")
    }

    /// The `precision_bits` binary digits after the point, most significant first.
    pub fn to_bits(&self) -> BitString {
        let k = self.precision_bits;
        (0..k).map(|i| self.mantissa.bit(k - 1 - i)).collect()
    }
}

/// Largest `k`-bit dyadic value not exceeding `x`.
pub fn dyadic_truncate(x: &ExactRational, k: u64) -> Result<DyadicFraction> {
    if !x.in_unit_interval() {
        return Err(Error::Domain(format!("{x} is outside [0, 1)")));
    }
    let shift = usize::try_from(k).map_err(|_| Error::Domain("precision too large".into()))?;
    let scaled = (x.numer() << shift) / x.denom();
    let mantissa = scaled.to_biguint().expect("non-negative");
    DyadicFraction::new(mantissa, k)
}

/// Smallest integer `L` with `2^-L <= w`, for `0 < w <= 1`.
pub fn ceil_neg_log2(w: &ExactRational) -> Result<u64> {
    if !w.numer().is_positive() {
        return Err(Error::Domain(format!("width {w} must be positive")));
    }
    if *w > ExactRational::one() {
        return Err(Error::Domain(format!("width {w} exceeds 1")));
    }
    let a = w.numer().magnitude();
    let b = w.denom().magnitude();
    Ok(ceil_log2_ratio(a, b))
}

/// Smallest `L >= 0` with `2^L * a >= b`, for positive `a`.
pub(crate) fn ceil_log2_ratio(a: &BigUint, b: &BigUint) -> u64 {
    let mut l = b.bits().saturating_sub(a.bits());
    while (a << l) < *b {
        l += 1;
    }
    while l > 0 && (a << (l - 1)) >= *b {
        l -= 1;
    }
    l
}

/// An ordered sequence of bits.
///
/// Positions can be addressed from the front (0-based) or as a distance from
/// the end, where distance 1 is the last bit.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            bits: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        self.bits.get(index).copied()
    }

    pub fn get_from_end(&self, distance: usize) -> Option<bool> {
        if distance == 0 || distance > self.len() {
            return None;
        }
        self.get(self.len() - distance)
    }

    /// Inverts the bit at `distance` from the end.
    pub fn flip_from_end(&mut self, distance: usize) -> Result<()> {
        if distance == 0 || distance > self.len() {
            return Err(Error::OutOfRange {
                what: "distance from end",
                value: distance,
                max: self.len(),
            });
        }
        let i = self.len() - distance;
        self.bits[i] = !self.bits[i];
        Ok(())
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_zeros(&self) -> u64 {
        self.bits.iter().filter(|b| !**b).count() as u64
    }

    /// Length of the longest common prefix with `other`.
    pub fn common_prefix_len(&self, other: &BitString) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Packs MSB-first, zero-padding the final byte.
    pub fn to_packed(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i)))
            })
            .collect()
    }

    /// Unpacks the first `len` bits of MSB-first `bytes`.
    pub fn from_packed(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() * 8 < len {
            return Err(Error::Container(format!(
                "{} bytes cannot hold {len} bits",
                bytes.len()
            )));
        }
        Ok((0..len)
            .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
            .collect())
    }

    /// Raw message file layout: big-endian `u64` bit count, then packed bits.
    pub fn to_length_prefixed(&self) -> Vec<u8> {
        let mut out = (self.len() as u64).to_be_bytes().to_vec();
        out.extend(self.to_packed());
        out
    }

    pub fn from_length_prefixed(bytes: &[u8]) -> Result<Self> {
        let header: [u8; 8] = bytes
            .get(..8)
            .and_then(|h| h.try_into().ok())
            .ok_or_else(|| {
                Error::Container("bit file shorter than its 8-byte length prefix".into())
            })?;
        let len = usize::try_from(u64::from_be_bytes(header))
            .map_err(|_| Error::Container("bit count does not fit in memory".into()))?;
        let body = &bytes[8..];
        if body.len() != len.div_ceil(8) {
            return Err(Error::Container(format!(
                "bit file declares {len} bits but carries {} bytes",
                body.len()
            )));
        }
        Self::from_packed(body, len)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self {
            bits: iter.into_iter().collect(),
        }
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self { bits }
    }
}

/// Parses `'0'`/`'1'` characters; spaces and underscores are ignored.
impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(s.to_string())),
            })
            .collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}
