use thiserror::Error;

use crate::skew::JMap;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not skew-symmetric (max |A + Aᵀ| entry = {max_defect:e})")]
    NotSkew { max_defect: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("a map needs at least one component")]
    EmptyMap,

    #[error("operation requires exactly two components, map has {0}")]
    UnsupportedRank(usize),

    #[error("no orthogonal conjugator: {reason}")]
    NoConjugator { reason: String },

    #[error("maps are not isospectral (worst invariant p_{{{a},{b}}} deviates by {deviation:e})")]
    NotIsospectral { a: usize, b: usize, deviation: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("flow diverged at t = {t}")]
    Divergence { t: f64, last_good: Box<JMap> },

    #[error("quadrature needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("unknown base preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid catalog reference `{id}`: {reason}")]
    Catalog { id: String, reason: String },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
