use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("normal undefined at {0:?}")]
    NormalUndefined(Vec<f64>),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("CFL violation: time step {ht:e} exceeds monotone limit {limit:e}")]
    CflViolation { ht: f64, limit: f64 },

    #[error("non-finite value at lattice index {index} after step {step}")]
    NonFinite { index: usize, step: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("value below noise floor: {0}")]
    NoiseFloor(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("shooting failed to converge (residual {residual:e})")]
    ShootingFailed { residual: f64 },

    #[error("region/barrier mismatch: {0}")]
    RegionMismatch(String),

    #[error("series of 3 required, got {0}")]
    SeriesRequired(usize),

    #[error("insufficient lattice points: {0}")]
    InsufficientPoints(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
