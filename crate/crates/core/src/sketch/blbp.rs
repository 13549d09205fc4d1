//! Fixed-accuracy adaptive randomized STHOSVD with block Lanczos
//! bidiagonalization and deflated QR on both sides.

use log::{debug, warn};

use super::qr::{defl_qr, orthonormal_columns};
use super::tucker::{SketchConfig, SketchMode, TuckerFactors};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::tensor::{mode_product, unfold, DenseTensor, Matrix};

/// Per-mode record of one bidiagonalization run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDiagnostics {
    pub mode: usize,
    /// Residual energy estimate `E` at exit.
    pub energy: f64,
    /// `||A||_F^2` of the unfolding processed for this mode.
    pub input_energy: f64,
    pub iterations: usize,
    /// Widths of the accepted `U` blocks.
    pub block_widths: Vec<usize>,
    /// Columns dropped by deflation (both sides).
    pub deflations: usize,
    /// Local loss of orthogonality of the `U` blocks.
    pub orthogonality_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BLBPDiagnostics {
    pub modes: Vec<ModeDiagnostics>,
}

impl BLBPDiagnostics {
    /// `sum_j E_j`, the aggregate squared-error estimate.
    pub fn total_energy(&self) -> f64 {
        self.modes.iter().map(|m| m.energy).sum()
    }
}

fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// `max_i max(||U_i^T U_i - I||_2, ||U_{i-1}^T U_i||_2)`.
pub fn local_orthogonality_loss(blocks: &[Matrix]) -> f64 {
    let mut loss: f64 = 0.0;
    for (i, u) in blocks.iter().enumerate() {
        let w = u.ncols();
        loss = loss.max(spectral_norm(&(u.transpose() * u - Matrix::identity(w, w))));
        if i > 0 {
            loss = loss.max(spectral_norm(&(blocks[i - 1].transpose() * u)));
        }
    }
    loss
}

fn hcat(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Fresh orthonormal directions orthogonal to `basis`.
fn fresh_directions(basis: &Matrix, count: usize, rng: &mut SeededRng) -> Matrix {
    let n = basis.nrows();
    let mut g = rng.normal_matrix(n, count);
    if basis.ncols() > 0 {
        for _ in 0..2 {
            g -= basis * (basis.transpose() * &g);
        }
    }
    orthonormal_columns(&g)
}

/// Block Lanczos bidiagonalization of one unfolding. Returns the accumulated
/// left basis and the diagnostics.
pub(crate) fn blbp_factor(
    a: &Matrix,
    eps: f64,
    b: usize,
    delta: Option<f64>,
    rng: &mut SeededRng,
    mode: usize,
) -> (Matrix, ModeDiagnostics) {
    let (rows, cols) = a.shape();
    let a_energy = a.norm_squared();
    let mut diag = ModeDiagnostics {
        mode,
        energy: a_energy,
        input_energy: a_energy,
        iterations: 0,
        block_widths: Vec::new(),
        deflations: 0,
        orthogonality_loss: 0.0,
    };
    if a_energy == 0.0 {
        diag.energy = 0.0;
        return (Matrix::zeros(rows, 0), diag);
    }
    let delta = delta.unwrap_or(1e-10 * a_energy.sqrt());
    if delta >= a_energy.sqrt() {
        warn!("mode {mode}: deflation tolerance {delta:.3e} is not below ||A||_F");
    }
    let target = eps * eps * a_energy;
    let max_rank = rows.min(cols);
    let max_iters = max_rank.div_ceil(b) + 2;

    let mut v = orthonormal_columns(&rng.normal_matrix(cols, b.min(cols)));
    let mut v_all = v.clone();
    let mut u_prev = Matrix::zeros(rows, 0);
    let mut l = Matrix::zeros(0, v.ncols());
    let mut u_blocks: Vec<Matrix> = Vec::new();
    let mut e = a_energy;

    for it in 0..max_iters {
        diag.iterations = it + 1;
        let w = a * &v - &u_prev * &l;
        let dq = defl_qr(&w, delta);
        diag.deflations += v.ncols() - dq.s;
        e -= dq.r.norm_squared();
        let u = dq.q;
        let r = dq.r;
        if u.ncols() > 0 {
            u_blocks.push(u.clone());
        }
        let total_u: usize = u_blocks.iter().map(|m| m.ncols()).sum();
        if total_u >= max_rank {
            break;
        }
        let mut vn = a.transpose() * &u - &v * r.transpose();
        vn -= &v_all * (v_all.transpose() * &vn);
        let dv = defl_qr(&vn, delta);
        diag.deflations += u.ncols() - dv.s;
        let lt = dv.r;
        e -= lt.norm_squared();
        let mut v_next = dv.q;
        v_all = hcat(&v_all, &v_next);
        // L is (width of U) x (width of V_next); augmented columns couple to
        // nothing, so they get zero rows in L^T.
        let mut l_next = lt.transpose();
        if dv.s < b && v_all.ncols() < cols {
            let extra = fresh_directions(&v_all, (b - dv.s).min(cols - v_all.ncols()), rng);
            v_all = hcat(&v_all, &extra);
            v_next = hcat(&v_next, &extra);
            let mut padded = Matrix::zeros(l_next.nrows(), v_next.ncols());
            padded.columns_mut(0, l_next.ncols()).copy_from(&l_next);
            l_next = padded;
        }
        if e < target || v_next.ncols() == 0 {
            break;
        }
        u_prev = u;
        v = v_next;
        l = l_next;
    }
    diag.energy = e;
    diag.block_widths = u_blocks.iter().map(|m| m.ncols()).collect();
    diag.orthogonality_loss = local_orthogonality_loss(&u_blocks);
    let width: usize = diag.block_widths.iter().sum();
    let mut f = Matrix::zeros(rows, width);
    let mut c = 0;
    for ub in &u_blocks {
        f.columns_mut(c, ub.ncols()).copy_from(ub);
        c += ub.ncols();
    }
    debug!("mode {mode}: rank {width} after {} iterations, E = {e:.3e}", diag.iterations);
    (f, diag)
}

/// AD-RSTHOSVD-BLBP over `cfg.order`.
pub fn ad_rsthosvd_blbp(x: &DenseTensor, cfg: &SketchConfig) -> Result<(TuckerFactors, BLBPDiagnostics)> {
    cfg.validate(x.dims())?;
    let SketchMode::FixedAccuracy { eps, block, delta } = &cfg.mode else {
        return Err(Error::InvalidSketch("Lanczos bidiagonalization needs a fixed-accuracy configuration".into()));
    };
    let mut rng = SeededRng::new(cfg.seed);
    let mut factors: Vec<Option<Matrix>> = vec![None; x.order()];
    let mut diags = BLBPDiagnostics::default();
    let mut core = x.clone();
    let mut zero = false;
    for &k in &cfg.order {
        let mut mode_rng = rng.fork();
        if zero {
            factors[k] = Some(Matrix::zeros(x.dims()[k], 0));
            continue;
        }
        let a = unfold(&core, k)?;
        let (f, d) = blbp_factor(&a, *eps, *block, *delta, &mut mode_rng, k);
        diags.modes.push(d);
        if f.ncols() == 0 {
            zero = true;
        } else {
            core = mode_product(&core, &f.transpose(), k)?;
        }
        factors[k] = Some(f);
    }
    let t = if zero {
        TuckerFactors::zero(x.dims(), factors)
    } else {
        TuckerFactors {
            dims: x.dims().to_vec(),
            core: Some(core),
            factors,
        }
    };
    Ok((t, diags))
}
