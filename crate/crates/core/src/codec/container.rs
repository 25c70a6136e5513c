//! `GLSC` container, big-endian:
//!
//! ```text
//! "GLSC" | version u8 = 1 | mode u8 | N u64 | zero_count u64
//!        | eps_num u16 | eps_den u16 | payload_bit_len u64 | payload (MSB-first, zero padded)
//! ```

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::gls_model::MapMode;
use crate::numerics::{BitString, ExactRational};

use super::{CompressedArtifact, SourceModel};

pub const MAGIC: &[u8; 4] = b"GLSC";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4 + 1 + 1 + 8 + 8 + 2 + 2 + 8;

/// Numerator and denominator of `epsilon` as they appear in the header.
pub fn epsilon_fields(epsilon: &ExactRational) -> Result<(u16, u16)> {
    let num = epsilon.numer().to_u16();
    let den = epsilon.denom().to_u16();
    match (num, den) {
        (Some(n), Some(d)) if epsilon.in_unit_interval() => Ok((n, d)),
        _ => Err(Error::InvalidRedundancy(format!(
            "epsilon = {epsilon} must lie in [0, 1) with a denominator of at most {}",
            u16::MAX
        ))),
    }
}

pub(super) fn write(artifact: &CompressedArtifact) -> Result<Vec<u8>> {
    let model = &artifact.model;
    let (eps_num, eps_den) = epsilon_fields(&model.epsilon)?;
    let payload = artifact.payload.to_packed();
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(model.mode.tag());
    out.extend_from_slice(&model.length.to_be_bytes());
    out.extend_from_slice(&model.zero_count.to_be_bytes());
    out.extend_from_slice(&eps_num.to_be_bytes());
    out.extend_from_slice(&eps_den.to_be_bytes());
    out.extend_from_slice(&(artifact.payload.len() as u64).to_be_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        if self.bytes.len() < K {
            return Err(Error::Container("truncated header".into()));
        }
        let (head, rest) = self.bytes.split_at(K);
        self.bytes = rest;
        Ok(head.try_into().expect("length checked"))
    }
}

pub(super) fn read(bytes: &[u8]) -> Result<CompressedArtifact> {
    let mut r = Reader { bytes };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::Container("bad magic, expected \"GLSC\"".into()));
    }
    let [version] = r.take::<1>()?;
    if version != VERSION {
        return Err(Error::Container(format!("unsupported version {version}")));
    }
    let [mode_tag] = r.take::<1>()?;
    let mode = MapMode::from_tag(mode_tag)
        .ok_or_else(|| Error::Container(format!("unknown mode {mode_tag}")))?;
    let length = u64::from_be_bytes(r.take()?);
    let zero_count = u64::from_be_bytes(r.take()?);
    let eps_num = u16::from_be_bytes(r.take()?);
    let eps_den = u16::from_be_bytes(r.take()?);
    let payload_bits = u64::from_be_bytes(r.take()?);

    if eps_den == 0 {
        return Err(Error::Container("epsilon denominator is zero".into()));
    }
    if eps_num != 0 && eps_num >= eps_den {
        return Err(Error::Container(format!(
            "epsilon {eps_num}/{eps_den} is not below 1"
        )));
    }
    if zero_count == 0 || zero_count >= length {
        return Err(Error::Container(format!(
            "zero count {zero_count} is inconsistent with length {length}"
        )));
    }
    let payload_bits = usize::try_from(payload_bits)
        .map_err(|_| Error::Container("payload length does not fit in memory".into()))?;
    if r.bytes.len() != payload_bits.div_ceil(8) {
        return Err(Error::Container(format!(
            "header declares {payload_bits} payload bits but {} bytes follow",
            r.bytes.len()
        )));
    }
    let payload = BitString::from_packed(r.bytes, payload_bits)?;
    let epsilon = ExactRational::new(BigInt::from(eps_num), BigInt::from(eps_den))?;
    Ok(CompressedArtifact {
        model: SourceModel {
            zero_count,
            length,
            epsilon,
            mode,
        },
        payload,
    })
}
