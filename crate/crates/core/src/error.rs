use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("instance too large: size {size} exceeds limit {limit}")]
    InstanceTooLarge { size: usize, limit: usize },
    #[error("d_table must be non-decreasing (index {0})")]
    Monotonicity(usize),
    #[error("saturation violated: d(M) = {d_m} >= 1 - mu = {bound}")]
    Saturation { d_m: f64, bound: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("probability vector not normalized (sum {0})")]
    NotNormalized(f64),
    #[error("pair has zero probability")]
    ZeroProbability,
    #[error("no convergence after {iterations} iterations (gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },
    #[error("constraint violated: sum i*beta_i = {0}")]
    ConstraintViolated(f64),
    #[error("empty feasible grid")]
    EmptyGrid,
    #[error("feasibility exhausted after {attempts} rejections ({found} codewords found)")]
    FeasibilityExhausted { attempts: usize, found: usize },
    #[error("non-integral composition: {0}")]
    NonIntegral(String),
    #[error("empty code")]
    EmptyCode,
    #[error("no codeword matches")]
    NoCandidate,
    #[error("{0} codewords match")]
    Ambiguous(usize),
    #[error("sync string construction failed at length {0}")]
    ConstructionFailed(usize),
    #[error("decode failure: {0}")]
    DecodeFailure(String),
    #[error("symbol {symbol} outside alphabet of size {size}")]
    SymbolOutOfAlphabet { symbol: usize, size: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
