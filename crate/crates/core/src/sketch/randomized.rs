//! Randomized GNHTSVT: sketch to a Tucker core, threshold the core, expand.

use super::bki::rsthosvd_bki;
use super::blbp::ad_rsthosvd_blbp;
use super::tucker::{SketchConfig, SketchMode, TuckerFactors};
use crate::error::{Error, Result};
use crate::prox::Penalty;
use crate::tensor::DenseTensor;
use crate::threshold::gnhtsvt;
use crate::transform::Transform;

/// Tucker compression with whichever sketch `cfg` selects.
pub fn sketch(x: &DenseTensor, cfg: &SketchConfig) -> Result<TuckerFactors> {
    match cfg.mode {
        SketchMode::FixedRank { .. } => rsthosvd_bki(x, cfg),
        SketchMode::FixedAccuracy { .. } => ad_rsthosvd_blbp(x, cfg).map(|(t, _)| t),
    }
}

/// GNHTSVT evaluated on the sketched core. When a transform mode is
/// compressed the core gets a transform of matching size (FFT and DCT only).
pub fn gnhtsvt_randomized(
    a: &DenseTensor,
    l: &Transform,
    p: &Penalty,
    tau: f64,
    cfg: &SketchConfig,
) -> Result<DenseTensor> {
    if a.order() < 3 {
        return Err(Error::OrderTooLow {
            required: 3,
            order: a.order(),
        });
    }
    let t = sketch(a, cfg)?;
    let Some(core) = t.core() else {
        return DenseTensor::zeros(a.dims());
    };
    let core_l = if core.dims()[2..] == a.dims()[2..] {
        l.clone()
    } else {
        l.resized(&core.dims()[2..])?
    };
    let shrunk = gnhtsvt(core, &core_l, p, tau)?;
    TuckerFactors {
        dims: t.dims.clone(),
        core: Some(shrunk),
        factors: t.factors.clone(),
    }
    .reconstruct()
}
