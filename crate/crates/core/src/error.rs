use thiserror::Error;

/// Errors produced by the codec, its geometry, and the experiment harness.
///
/// A forbidden-symbol hit during decoding is *not* an error; it is reported
/// through [`crate::codec::DecodeOutcome::Detected`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("value outside domain: {0}")]
    Domain(String),

    #[error("degenerate source: {0}")]
    DegenerateSource(String),

    #[error("invalid redundancy: {0}")]
    InvalidRedundancy(String),

    #[error("zero-width branch selected for symbol {0:?}")]
    DegenerateBranch(crate::gls_model::SymbolKind),

    #[error("malformed container: {0}")]
    Container(String),

    #[error("framing error: length {len} is not a multiple of {block}")]
    Framing { len: usize, block: usize },

    #[error("{what} {value} out of range 1..={max}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
