//! Randomized low-rank Tucker approximation.

mod bki;
mod blbp;
mod qr;
mod randomized;
mod tucker;

pub use bki::rsthosvd_bki;
pub use blbp::{ad_rsthosvd_blbp, local_orthogonality_loss, BLBPDiagnostics, ModeDiagnostics};
pub use qr::{defl_qr, pivoted_qr, DeflatedQr};
pub use randomized::{gnhtsvt_randomized, sketch};
pub use tucker::{sthosvd, SketchConfig, SketchMode, TuckerFactors};
