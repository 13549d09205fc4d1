//! Synthetic data, the SR/NR corruption protocol, quality metrics and the
//! GTEN tensor file format.

mod corrupt;
mod io;
mod metrics;
mod synth;

pub use corrupt::{corrupt, Corruption, Mask};
pub use io::{read_tensor, read_tensor_from, write_tensor, write_tensor_to, FormatError};
pub use metrics::{metrics, psnr, rse, Metrics, PSNR_CAP};
pub use synth::synth_lowrank_smooth;
