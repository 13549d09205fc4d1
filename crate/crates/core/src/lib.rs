//! Tensor recovery with generalized nonconvex regularizers under invertible
//! linear transforms.

pub mod data;
pub mod error;
pub mod gradient;
pub mod prox;
pub mod recovery;
pub mod rng;
pub mod sketch;
pub mod tensor;
pub mod threshold;
pub mod transform;
pub mod tsvd;

pub use error::{Error, Result};
pub use rng::SeededRng;
pub use tensor::{fold, mode_product, norms, unfold, CMatrix, ComplexDenseTensor, DenseTensor, Matrix, Norms};
pub use transform::{Transform, TransformKind};
pub use tsvd::{htnn, identity_tensor, t_transpose, tproduct, transformed_singular_values, tsvd, TSVDFactors};
pub use gradient::{grad, grad_adjoint, solve_grad_system, GradientSet};
pub use prox::{scalar_prox, Penalty};
pub use threshold::{gnhtctv, gnhtsvt, gnhtt, ShrinkStructure};
pub use sketch::{
    ad_rsthosvd_blbp, defl_qr, gnhtsvt_randomized, rsthosvd_bki, sthosvd, BLBPDiagnostics, SketchConfig, SketchMode,
    TuckerFactors,
};
pub use data::{corrupt, metrics, read_tensor, synth_lowrank_smooth, write_tensor, Mask, Metrics};
pub use recovery::{
    gnhtc, gnobhtc, gnobrhtc, gnrhtc, onebit_observe, ObservationSet, Regularizer, SolveReport, SolverConfig, Status,
};
