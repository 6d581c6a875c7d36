use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),

    #[error("empty ground state: Z(+inf) = c_0 = 0")]
    EmptyGroundState,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid inverse-temperature range: beta_min = {min} must be below beta_max = {max}")]
    InvalidRange { min: String, max: String },

    #[error("overlapping stream keys in one oracle round: {0}")]
    OverlappingStreams(String),

    #[error("temperature index {index} outside schedule of length {len}")]
    TemperatureIndex { index: usize, len: usize },

    #[error("unsupported parameterization: {0}")]
    UnsupportedParameterization(String),

    #[error("enumeration budget exceeded: n = {n} > {limit}; use the glauber sampler instead")]
    EnumerationBudget { n: usize, limit: usize },

    #[error("sampler gave up after {attempts} rejection attempts at beta = +inf")]
    SamplerBudget { attempts: u64 },

    #[error("estimate collapsed to zero: every weight of factor {factor} vanished (increase r)")]
    VanishingEstimate { factor: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
