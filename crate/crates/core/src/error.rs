use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate grid: n = {n} (need n >= 8), r_max = {r_max} (need r_max > 0)")]
    DegenerateGrid { n: usize, r_max: f64 },

    #[error("field has {got} samples but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite sample at node {index}")]
    NonFiniteSample { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sphere constraint violated at node {index}: |u| = {norm}")]
    OffSphere { index: usize, norm: f64 },

    #[error("linear solve failed at row {row}: {reason}")]
    LinearSolve { row: usize, reason: String },

    #[error("time step {dt:e} exceeds the explicit stability bound {limit:e}")]
    StabilityBound { dt: f64, limit: f64 },

    #[error("non-finite state at step {step} (t = {t})")]
    NonFiniteState { step: usize, t: f64 },

    #[error("mass drift {drift:e} exceeds the instability threshold at step {step} (t = {t})")]
    Instability { step: usize, t: f64, drift: f64 },

    #[error("degenerate frame seed: {0}")]
    DegenerateSeed(String),

    #[error("weight audit failed at r = {r:e}: {what}")]
    WeightAudit { r: f64, what: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of the time integrators themselves (as opposed to bad input).
    pub fn is_solver_abort(&self) -> bool {
        matches!(
            self,
            Error::LinearSolve { .. }
                | Error::NonFiniteState { .. }
                | Error::Instability { .. }
                | Error::StabilityBound { .. }
        )
    }
}
