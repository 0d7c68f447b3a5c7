use thiserror::Error;

/// Errors raised across the toolkit. Variants map one-to-one onto the
/// failure classes each operation documents.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported number of projections n = {0} (need n >= 3)")]
    UnsupportedN(usize),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("unsupported scalar {0}: not in the exceptional sequence for this n")]
    UnsupportedScalar(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("invalid noise level {0}: must lie in [0, 1]")]
    InvalidLevel(f64),
    #[error("unsupported outcome count {0}: only two-outcome measurements are handled")]
    UnsupportedOutcomes(usize),
    #[error("invalid reference correlation: {0}")]
    InvalidReference(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("spectral degeneracy: {0}")]
    SpectralDegeneracy(String),
    #[error("not a representation: {0}")]
    NotARepresentation(String),
    #[error("intertwiner verification failed: {0}")]
    IntertwinerFailed(String),
    #[error("isometry fit degenerate: {0}")]
    FitDegenerate(String),
    #[error("junk extraction failed: alpha = {alpha:.3e} is below the minimum {min}")]
    JunkExtractionFailed { alpha: f64, min: f64 },
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
