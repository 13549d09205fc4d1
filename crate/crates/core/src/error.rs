use thiserror::Error;

/// Errors raised by the tensor kernels, sketches and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("mode {mode} out of range for an order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("operation requires an order >= {required} tensor, got order {order}")]
    OrderTooLow { required: usize, order: usize },

    #[error("transform mismatch: {0}")]
    TransformMismatch(String),

    #[error("transform matrix for mode {mode} is not unitary up to scale (deviation {deviation:.3e})")]
    NotScaledUnitary { mode: usize, deviation: f64 },

    #[error("inverse transform left an imaginary residue of {residue:.3e} (limit {limit:.3e})")]
    ImaginaryResidue { residue: f64, limit: f64 },

    #[error("SVD failed to converge on face {face}")]
    SvdNoConvergence { face: usize },

    #[error("invalid penalty parameters: {0}")]
    InvalidPenalty(String),

    #[error("invalid sketch configuration: {0}")]
    InvalidSketch(String),

    #[error("Krylov block for mode {mode} has numerical rank {rank} below target {target}")]
    KrylovRankDeficient {
        mode: usize,
        rank: usize,
        target: usize,
    },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
