use thiserror::Error;

/// Errors raised by the hjlab kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sampled value is not finite at node {node}")]
    NonFinite { node: usize },

    #[error("time index {index} out of range (valid: {lo}..={hi})")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("hamiltonian is not normalized: H(0) = {value}, |grad H(0)| = {slope}")]
    NotNormalized { value: f64, slope: f64 },

    #[error("CFL violation on axis {axis}: dt = {dt} exceeds the monotone limit {limit}")]
    CflViolation { axis: usize, dt: f64, limit: f64 },

    #[error("scheme blew up at t = {time}")]
    Blowup { time: f64 },

    #[error("characteristic image map is not strictly increasing at t = {time}")]
    HorizonExceeded { time: f64 },

    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("flow images are not strictly increasing at t = {time}")]
    NotMonotone { time: f64 },

    #[error("counterexample cone leaves the cell: t = {time} >= half cell {half_cell}")]
    ConeLeavesCell { time: f64, half_cell: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
