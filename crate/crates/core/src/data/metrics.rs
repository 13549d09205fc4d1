use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// PSNR reported for an exact match.
pub const PSNR_CAP: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub psnr: f64,
    /// Mean of per-face PSNR over the trailing-mode faces.
    pub band_mean_psnr: f64,
    pub rse: f64,
}

fn psnr_of(sq_err: f64, count: usize) -> f64 {
    let mse = sq_err / count as f64;
    if mse == 0.0 {
        PSNR_CAP
    } else {
        (10.0 * (1.0 / mse).log10()).min(PSNR_CAP)
    }
}

/// Peak signal-to-noise ratio with unit peak.
pub fn psnr(reference: &DenseTensor, estimate: &DenseTensor) -> Result<f64> {
    Ok(psnr_of(reference.fro_dist(estimate)?.powi(2), reference.len()))
}

/// `||estimate - reference||_F / ||reference||_F`.
pub fn rse(reference: &DenseTensor, estimate: &DenseTensor) -> Result<f64> {
    let nrm = reference.fro_norm();
    if nrm == 0.0 {
        return Err(Error::InvalidParameter("RSE needs a nonzero reference".into()));
    }
    Ok(reference.fro_dist(estimate)? / nrm)
}

pub fn metrics(reference: &DenseTensor, estimate: &DenseTensor) -> Result<Metrics> {
    reference.same_dims(estimate)?;
    let psnr_all = psnr(reference, estimate)?;
    let band_mean_psnr = if reference.order() >= 3 {
        let fl = reference.face_len();
        let nf = reference.num_faces();
        (0..nf)
            .map(|j| {
                let e: f64 = reference
                    .face(j)
                    .iter()
                    .zip(estimate.face(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                psnr_of(e, fl)
            })
            .sum::<f64>()
            / nf as f64
    } else {
        psnr_all
    };
    Ok(Metrics {
        psnr: psnr_all,
        band_mean_psnr,
        rse: rse(reference, estimate)?,
    })
}
