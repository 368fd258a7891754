use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid window too small: F({x:.6}) = {value:.6e}, expected {expected:.6e}")]
    WindowTooSmall { x: f64, value: f64, expected: f64 },

    #[error("input F is not monotone at index {index} (drop of {drop:.3e})")]
    NonMonotoneInput { index: usize, drop: f64 },

    #[error("state validation failed:\n{0}")]
    ValidationFailed(String),

    #[error("time step {dt:.6e} exceeds the CFL bound {bound:.6e}")]
    DtExceedsCfl { dt: f64, bound: f64 },

    #[error("zero total energy requires an explicit dt override")]
    ZeroEnergyNeedsDt,

    #[error("evolution time {tau:.6e} exceeds the CFL bound {bound:.6e}")]
    TauExceedsCfl { tau: f64, bound: f64 },

    #[error("breakpoints collided during evolution at index {0}")]
    BreakpointCollision(usize),

    #[error("invalid custom initial data: {0}")]
    InvalidCustomData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} outside the valid range [{lo}, {hi}]")]
    RangeError { t: f64, lo: f64, hi: f64 },

    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),

    #[error("test function support [{lo}, {hi}] not covered by the run window [{run_lo}, {run_hi}]")]
    SupportNotCovered {
        lo: f64,
        hi: f64,
        run_lo: f64,
        run_hi: f64,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error("snapshot file error: {0}")]
    SnapshotFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
