//! GLS compression with an optional forbidden symbol.
//!
//! Encoding narrows `[0, 1)` to the interval of initial values whose orbit
//! spells the message and writes a binary point inside it. Decoding iterates
//! that point forward. When `epsilon > 0` the valid points form a Cantor set,
//! and a corrupted payload usually wanders into the forbidden branch, which is
//! reported as [`DecodeOutcome::Detected`].

pub mod container;
mod engine;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gls_model::{make_partition, CodingInterval, GlsPartition, MapMode, SymbolKind};
use crate::numerics::{rational_from_counts, BitString, ExactRational};

use engine::ScaledInterval;

/// Everything the decoder needs to rebuild the partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceModel {
    pub zero_count: u64,
    pub length: u64,
    pub epsilon: ExactRational,
    pub mode: MapMode,
}

impl SourceModel {
    pub fn new(
        zero_count: u64,
        length: u64,
        epsilon: ExactRational,
        mode: MapMode,
    ) -> Result<Self> {
        if zero_count == 0 || zero_count >= length {
            return Err(Error::DegenerateSource(format!(
                "{zero_count} zeros in {length} symbols; need at least one 0 and one 1"
            )));
        }
        container::epsilon_fields(&epsilon)?;
        Ok(Self {
            zero_count,
            length,
            epsilon,
            mode,
        })
    }

    pub fn from_message(msg: &BitString, epsilon: &ExactRational, mode: MapMode) -> Result<Self> {
        Self::new(msg.count_zeros(), msg.len() as u64, epsilon.clone(), mode)
    }

    pub fn p(&self) -> ExactRational {
        rational_from_counts(self.zero_count, self.length).expect("length >= 2")
    }

    pub fn partition(&self) -> Result<GlsPartition> {
        make_partition(&self.p(), &self.epsilon, self.mode)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedArtifact {
    pub model: SourceModel,
    pub payload: BitString,
}

impl CompressedArtifact {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        container::write(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        container::read(bytes)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    Success(BitString),
    /// The orbit entered the forbidden branch at `symbol_index`; `prefix`
    /// holds the symbols decoded before that.
    Detected {
        symbol_index: u64,
        prefix: BitString,
    },
}

impl DecodeOutcome {
    pub fn is_detected(&self) -> bool {
        matches!(self, DecodeOutcome::Detected { .. })
    }

    /// The decoded message, or the prefix decoded before detection.
    pub fn decoded(&self) -> &BitString {
        match self {
            DecodeOutcome::Success(m) => m,
            DecodeOutcome::Detected { prefix, .. } => prefix,
        }
    }
}

fn scaled_interval(msg: &BitString, part: &GlsPartition) -> Result<ScaledInterval> {
    let weights = part.integer_weights();
    let mut iv = ScaledInterval::unit();
    for bit in msg.iter() {
        iv.refine(SymbolKind::from_bit(bit), &weights)?;
    }
    Ok(iv)
}

/// The interval `[START, END)` of initial values whose orbit spells `msg`.
pub fn final_interval(msg: &BitString, part: &GlsPartition) -> Result<CodingInterval> {
    Ok(scaled_interval(msg, part)?.to_interval(&part.integer_weights()))
}

/// Payload bits for `msg` under an explicit partition.
pub fn encode_payload(msg: &BitString, part: &GlsPartition) -> Result<BitString> {
    let iv = scaled_interval(msg, part)?;
    Ok(iv.emit(&part.integer_weights(), part.mode() == MapMode::Tent))
}

/// Compresses `msg` with a partition built from its own symbol counts.
pub fn encode(
    msg: &BitString,
    epsilon: &ExactRational,
    mode: MapMode,
) -> Result<CompressedArtifact> {
    let model = SourceModel::from_message(msg, epsilon, mode)?;
    let payload = encode_payload(msg, &model.partition()?)?;
    Ok(CompressedArtifact { model, payload })
}

/// Writes the truncated midpoint of `iv`: `ceil(-log2 w)` bits when that stays
/// inside the interval, one more bit otherwise.
///
/// In Tent mode the emitted point must be strictly above `low`, since
/// endpoints of intervals reached through a descending branch may decode to a
/// different message.
pub fn emit_midpoint_bits(iv: &CodingInterval, mode: MapMode) -> Result<BitString> {
    let iv = CodingInterval::new(iv.low.clone(), iv.high.clone(), iv.flipped)?;
    let den = num_integer::Integer::lcm(iv.low.denom(), iv.high.denom());
    let scale = ExactRational::integer(den.clone());
    let low = (&iv.low * &scale).numer().magnitude().clone();
    let high = (&iv.high * &scale).numer().magnitude().clone();
    let width: BigUint = high - &low;
    Ok(engine::emit_fraction(
        &low,
        &width,
        den.magnitude(),
        mode == MapMode::Tent,
    ))
}

/// Iterates `payload` forward `n` times under `part`.
pub fn decode_payload(payload: &BitString, part: &GlsPartition, n: u64) -> DecodeOutcome {
    engine::iterate_point(payload, &part.integer_weights(), n)
}

pub fn decode(artifact: &CompressedArtifact) -> Result<DecodeOutcome> {
    let model = &artifact.model;
    let part = model
        .partition()
        .map_err(|e| Error::Container(e.to_string()))?;
    Ok(decode_payload(&artifact.payload, &part, model.length))
}

/// Empirical entropy `H(p)` in bits per symbol, `p = zero_count / n`.
pub fn entropy_bits_per_symbol(zero_count: u64, n: u64) -> Result<f64> {
    if zero_count == 0 || zero_count >= n {
        return Err(Error::DegenerateSource(format!(
            "{zero_count} zeros in {n} symbols"
        )));
    }
    let p = zero_count as f64 / n as f64;
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

fn check_epsilon(epsilon: &ExactRational) -> Result<()> {
    if epsilon.in_unit_interval() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "epsilon = {epsilon} must lie in [0, 1)"
        )))
    }
}

/// `R(eps) = -log2(1 - eps)`: extra bits spent per source symbol.
pub fn redundancy_bits_per_symbol(epsilon: &ExactRational) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(-(ExactRational::one() - epsilon).to_f64().log2())
}

/// `1 / (1 + R(eps))`.
pub fn code_rate(epsilon: &ExactRational) -> Result<f64> {
    Ok(1.0 / (1.0 + redundancy_bits_per_symbol(epsilon)?))
}

/// The rate as an exact rational, available when `1 - eps` is a power of two
/// (so `R(eps)` is an integer). `eps = 1 - 2^(1-n)` gives `1/n`.
pub fn code_rate_exact(epsilon: &ExactRational) -> Result<Option<ExactRational>> {
    check_epsilon(epsilon)?;
    let keep = ExactRational::one() - epsilon;
    let numer_is_one = keep.numer() == &num_bigint::BigInt::from(1u8);
    let den = keep.denom().magnitude();
    if !numer_is_one || den.count_ones() != 1 {
        return Ok(None);
    }
    let redundancy = den.trailing_zeros().unwrap_or(0);
    Ok(Some(ExactRational::new(1u64, 1 + redundancy)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gls_model::{forward_iterate, refine_interval};
    use crate::numerics::{ceil_neg_log2, DyadicFraction};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> ExactRational {
        ExactRational::ratio(n, d)
    }

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    /// Reference encoder: fold the rational refinement step by step.
    fn oracle_interval(msg: &BitString, part: &GlsPartition) -> CodingInterval {
        msg.iter().fold(CodingInterval::unit(), |iv, b| {
            refine_interval(&iv, SymbolKind::from_bit(b), part).unwrap()
        })
    }

    /// Reference decoder: repeated rational forward iteration.
    fn oracle_decode(payload: &BitString, part: &GlsPartition, n: u64) -> DecodeOutcome {
        let mut x = DyadicFraction::from_bits(payload).to_rational();
        let mut out = BitString::new();
        for i in 0..n {
            let (s, next) = forward_iterate(&x, part).unwrap();
            match s.to_bit() {
                Some(b) => out.push(b),
                None => {
                    return DecodeOutcome::Detected {
                        symbol_index: i,
                        prefix: out,
                    }
                }
            }
            x = next;
        }
        DecodeOutcome::Success(out)
    }

    #[test]
    fn bernoulli_shift_is_identity() {
        let msg = bits("0110");
        let part = make_partition(&r(1, 2), &r(0, 1), MapMode::Binary).unwrap();
        let iv = final_interval(&msg, &part).unwrap();
        assert_eq!((iv.low, iv.high), (r(6, 16), r(7, 16)));
        let art = encode(&msg, &r(0, 1), MapMode::Binary).unwrap();
        assert_eq!(art.payload, bits("0110"));
        assert_eq!(decode(&art).unwrap(), DecodeOutcome::Success(msg));
    }

    #[test]
    fn worked_tent_example() {
        let msg = bits("0010110100");
        let art = encode(&msg, &r(0, 1), MapMode::Tent).unwrap();
        assert_eq!(art.model.p(), r(3, 5));
        let part = art.model.partition().unwrap();
        let iv = oracle_interval(&msg, &part);
        assert_eq!(final_interval(&msg, &part).unwrap(), iv);
        let w = ExactRational::from(
            num_traits::pow(r(3, 5).as_big_rational().clone(), 6)
                * num_traits::pow(r(2, 5).as_big_rational().clone(), 4),
        );
        assert_eq!(iv.width(), w);
        let l0 = ceil_neg_log2(&w).unwrap() as usize;
        assert!(art.payload.len() == l0 || art.payload.len() == l0 + 1);
        let x = DyadicFraction::from_bits(&art.payload).to_rational();
        assert!(iv.contains_interior(&x));
        assert_eq!(decode(&art).unwrap(), DecodeOutcome::Success(msg));
    }

    #[test]
    fn midpoint_emission_examples() {
        let iv = CodingInterval::new(r(0, 1), r(1, 2), false).unwrap();
        assert_eq!(emit_midpoint_bits(&iv, MapMode::Binary).unwrap(), bits("0"));
        let iv = CodingInterval::new(r(6, 16), r(7, 16), false).unwrap();
        assert_eq!(
            emit_midpoint_bits(&iv, MapMode::Binary).unwrap(),
            bits("0110")
        );
        let iv = CodingInterval::new(r(1, 3), r(2, 3), false).unwrap();
        assert_eq!(
            emit_midpoint_bits(&iv, MapMode::Binary).unwrap(),
            bits("10")
        );
        // Truncation hits `low` exactly: Tent mode needs the extra bit.
        let iv = CodingInterval::new(r(6, 16), r(7, 16), true).unwrap();
        assert_eq!(
            emit_midpoint_bits(&iv, MapMode::Tent).unwrap(),
            bits("01101")
        );
    }

    #[test]
    fn midpoint_falls_back_to_extra_bit() {
        // [7/16, 10/16): L0 = 3, mid = 17/32 truncates to 1/2, inside.
        let iv = CodingInterval::new(r(7, 16), r(10, 16), false).unwrap();
        assert_eq!(
            emit_midpoint_bits(&iv, MapMode::Binary).unwrap(),
            bits("100")
        );
        // [49/128, 65/128): L0 = 3, mid = 57/128 truncates to 3/8 = 48/128 < low,
        // so four bits: 7/16.
        let iv = CodingInterval::new(r(49, 128), r(65, 128), false).unwrap();
        assert_eq!(
            emit_midpoint_bits(&iv, MapMode::Binary).unwrap(),
            bits("0111")
        );
    }

    #[test]
    fn detection_in_forbidden_branch() {
        let model = SourceModel::new(1, 2, r(1, 2), MapMode::Binary).unwrap();
        let art = CompressedArtifact {
            model,
            payload: bits("01"),
        };
        match decode(&art).unwrap() {
            DecodeOutcome::Detected {
                symbol_index,
                prefix,
            } => {
                assert_eq!(symbol_index, 0);
                assert!(prefix.is_empty());
            }
            other => panic!("expected detection, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_messages_rejected() {
        for m in ["0000", "111", "", "0"] {
            assert!(matches!(
                encode(&bits(m), &r(0, 1), MapMode::Binary),
                Err(Error::DegenerateSource(_))
            ));
        }
        assert!(encode(&bits("01"), &r(1, 1), MapMode::Binary).is_err());
        // Not representable in the 16-bit header field.
        assert!(encode(&bits("01"), &r(1, 70_000), MapMode::Binary).is_err());
    }

    #[test]
    fn container_layout() {
        let art = encode(&bits("0110"), &r(1, 200), MapMode::Tent).unwrap();
        let bytes = art.to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"GLSC");
        assert_eq!(bytes[4], 1);
        assert_eq!(bytes[5], 1);
        assert_eq!(&bytes[6..14], &4u64.to_be_bytes());
        assert_eq!(&bytes[14..22], &2u64.to_be_bytes());
        assert_eq!(&bytes[22..24], &1u16.to_be_bytes());
        assert_eq!(&bytes[24..26], &200u16.to_be_bytes());
        assert_eq!(&bytes[26..34], &(art.payload.len() as u64).to_be_bytes());
        assert_eq!(bytes.len(), 34 + art.payload.len().div_ceil(8));
        assert_eq!(CompressedArtifact::from_bytes(&bytes).unwrap(), art);
    }

    #[test]
    fn container_rejects_malformed_headers() {
        let art = encode(&bits("0110"), &r(1, 200), MapMode::Binary).unwrap();
        let good = art.to_bytes().unwrap();
        let corrupt = |i: usize, v: u8| {
            let mut b = good.clone();
            b[i] = v;
            CompressedArtifact::from_bytes(&b)
        };
        assert!(matches!(corrupt(0, b'X'), Err(Error::Container(_))));
        assert!(corrupt(4, 2).is_err());
        assert!(corrupt(5, 7).is_err());
        assert!(corrupt(25, 0).is_err()); // eps_den = 0
        assert!(corrupt(21, 0).is_err()); // zero_count = 0
        assert!(CompressedArtifact::from_bytes(&good[..20]).is_err());
        let mut long = good.clone();
        long.push(0);
        assert!(CompressedArtifact::from_bytes(&long).is_err());
        // eps = 200/200
        let mut b = good.clone();
        b[22..24].copy_from_slice(&200u16.to_be_bytes());
        assert!(CompressedArtifact::from_bytes(&b).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_bits_per_symbol(5000, 10000).unwrap(), 1.0);
        assert!((entropy_bits_per_symbol(1000, 10000).unwrap() - 0.4690).abs() < 1e-4);
        assert!((entropy_bits_per_symbol(3000, 10000).unwrap() - 0.8813).abs() < 1e-4);
        assert!(entropy_bits_per_symbol(0, 10).is_err());
        assert!(entropy_bits_per_symbol(10, 10).is_err());
    }

    #[test]
    fn redundancy_and_rate() {
        assert_eq!(redundancy_bits_per_symbol(&r(0, 1)).unwrap(), 0.0);
        assert_eq!(
            (10000.0 * redundancy_bits_per_symbol(&r(3, 100)).unwrap()).ceil(),
            440.0
        );
        assert!(redundancy_bits_per_symbol(&r(1, 1)).is_err());
        assert_eq!(code_rate(&r(0, 1)).unwrap(), 1.0);
        assert!((code_rate(&r(3, 4)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // 1 / (1 - log2 0.97) = 0.957906...
        assert!((code_rate(&r(3, 100)).unwrap() - 0.957906).abs() < 1e-6);
        assert_eq!(code_rate_exact(&r(3, 4)).unwrap(), Some(r(1, 3)));
        assert_eq!(code_rate_exact(&r(0, 1)).unwrap(), Some(r(1, 1)));
        assert_eq!(code_rate_exact(&r(3, 100)).unwrap(), None);
        assert!(code_rate(&r(3, 2)).is_err());
    }

    #[test]
    fn eps_zero_flips_never_detected() {
        let msg = bits("0010110100011101");
        for mode in [MapMode::Binary, MapMode::Tent] {
            let art = encode(&msg, &r(0, 1), mode).unwrap();
            for d in 1..=art.payload.len() {
                let mut bad = art.clone();
                bad.payload.flip_from_end(d).unwrap();
                let out = decode(&bad).unwrap();
                assert!(!out.is_detected());
            }
            // The first bit always lands far outside the original interval.
            let mut bad = art.clone();
            bad.payload.flip_from_end(art.payload.len()).unwrap();
            assert_ne!(decode(&bad).unwrap(), DecodeOutcome::Success(msg.clone()));
        }
    }

    fn message() -> impl Strategy<Value = BitString> {
        proptest::collection::vec(any::<bool>(), 2..60)
            .prop_filter("needs both symbols", |v| {
                v.contains(&true) && v.contains(&false)
            })
            .prop_map(BitString::from)
    }

    fn epsilon() -> impl Strategy<Value = ExactRational> {
        prop_oneof![
            Just(r(0, 1)),
            Just(r(1, 200)),
            Just(r(3, 100)),
            Just(r(1, 20)),
            Just(r(3, 4)),
            (1i64..100).prop_map(|n| r(n, 101)),
        ]
    }

    fn mode() -> impl Strategy<Value = MapMode> {
        prop_oneof![Just(MapMode::Binary), Just(MapMode::Tent)]
    }

    proptest! {
        #[test]
        fn engine_matches_rational_oracle(msg in message(), eps in epsilon(), mode in mode()) {
            let art = encode(&msg, &eps, mode).unwrap();
            let part = art.model.partition().unwrap();
            let iv = oracle_interval(&msg, &part);
            prop_assert_eq!(final_interval(&msg, &part).unwrap(), iv.clone());
            prop_assert_eq!(&art.payload, &emit_midpoint_bits(&iv, mode).unwrap());
            let x = DyadicFraction::from_bits(&art.payload).to_rational();
            prop_assert!(iv.contains(&x));
            prop_assert_eq!(decode(&art).unwrap(), DecodeOutcome::Success(msg.clone()));
        }

        #[test]
        fn corrupted_decoding_matches_oracle(msg in message(), eps in epsilon(), mode in mode(), d in 1usize..200) {
            let mut art = encode(&msg, &eps, mode).unwrap();
            let d = 1 + (d - 1) % art.payload.len();
            art.payload.flip_from_end(d).unwrap();
            let part = art.model.partition().unwrap();
            let fast = decode(&art).unwrap();
            prop_assert_eq!(&fast, &oracle_decode(&art.payload, &part, msg.len() as u64));
            if eps.is_zero() {
                prop_assert!(!fast.is_detected());
            }
            if let DecodeOutcome::Detected { symbol_index, prefix } = &fast {
                prop_assert_eq!(*symbol_index as usize, prefix.len());
                prop_assert!(prefix.len() < msg.len());
            }
        }

        #[test]
        fn payload_size_law(msg in message(), eps in epsilon(), mode in mode()) {
            let art = encode(&msg, &eps, mode).unwrap();
            let n = msg.len() as f64;
            let h = entropy_bits_per_symbol(msg.count_zeros(), msg.len() as u64).unwrap();
            let bound = (n * (h + redundancy_bits_per_symbol(&eps).unwrap())).ceil() as i64;
            let len = art.payload.len() as i64;
            prop_assert!(len >= bound - 1 && len <= bound + 2, "{} vs {}", len, bound);
        }

        #[test]
        fn container_round_trip(msg in message(), eps in epsilon(), mode in mode()) {
            let art = encode(&msg, &eps, mode).unwrap();
            prop_assert_eq!(CompressedArtifact::from_bytes(&art.to_bytes().unwrap()).unwrap(), art);
        }
    }
}
