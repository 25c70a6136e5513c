//! GLS-coding with a forbidden symbol.
//!
//! A binary message is compressed to an initial value of a piecewise-linear
//! chaotic map. Reserving a branch of width `epsilon` that no message uses
//! confines valid compressed values to a Cantor set, so most channel errors
//! surface during decoding as a visit to the forbidden branch.
//!
//! - [`numerics`]: exact rationals, dyadic fractions, bit strings
//! - [`gls_model`]: the three-branch map geometry
//! - [`codec`]: encode/decode, the `GLSC` container, rate diagnostics
//! - [`repetition`]: repetition codes and their Cantor-set geometry
//! - [`noise_lab`]: bit-flip experiments and reports

pub mod codec;
pub mod error;
pub mod gls_model;
pub mod noise_lab;
pub mod numerics;
pub mod repetition;

pub use codec::{decode, encode, CompressedArtifact, DecodeOutcome, SourceModel};
pub use error::{Error, Result};
pub use gls_model::{GlsPartition, MapMode, SymbolKind};
pub use numerics::{BitString, ExactRational};
