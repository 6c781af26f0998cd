use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid needs at least 2x2 cells, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("domain extents must be positive and finite, got {lx} x {ly}")]
    InvalidExtent { lx: f64, ly: f64 },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at DOF {index}")]
    NonFinite { index: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("DOF index {index} out of range for {len} cells")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("restricted evaluation is missing stencil DOF {index}")]
    MissingStencilDof { index: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("duplicate training parameter {0}")]
    DuplicateParameter(f64),
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("step count must be at least 1")]
    InvalidStepCount,
    #[error("non-finite state after step {step}")]
    NonFiniteState { step: usize },
    #[error("solution blew up at step {step}: sup norm {norm:e} exceeds {limit:e}")]
    BlowUp { step: usize, norm: f64, limit: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
}
