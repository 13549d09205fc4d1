//! ADMM for robust (GNRHTC) and noise-free (GNHTC) tensor completion.

use std::time::Instant;

use log::debug;
use rayon::prelude::*;

use super::config::{Operators, SolverConfig};
use super::report::{kkt_diagnostics, AdmmState, SolveReport, Status};
use crate::data::Mask;
use crate::error::{Error, Result};
use crate::prox::Penalty;
use crate::sketch::{gnhtsvt_randomized, SketchConfig};
use crate::tensor::DenseTensor;
use crate::threshold::{gnhtsvt, gnhtt};
use crate::transform::Transform;

/// Low-rank thresholding step, deterministic or sketched.
pub(crate) fn threshold_all(
    inputs: &[DenseTensor],
    l: &Transform,
    p: &Penalty,
    tau: f64,
    sketch: Option<&SketchConfig>,
) -> Result<Vec<DenseTensor>> {
    inputs
        .par_iter()
        .map(|a| match sketch {
            Some(cfg) => gnhtsvt_randomized(a, l, p, tau, cfg),
            None => gnhtsvt(a, l, p, tau),
        })
        .collect()
}

fn zeros_like(x: &DenseTensor) -> DenseTensor {
    DenseTensor::zeros(x.dims()).expect("valid dims")
}

fn check_inputs(observed: &DenseTensor, mask: &Mask, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if mask.is_empty() {
        return Err(Error::InvalidParameter("observed set is empty".into()));
    }
    if mask.dims() != observed.dims() {
        return Err(Error::ShapeMismatch(format!(
            "mask dims {:?} vs tensor dims {:?}",
            mask.dims(),
            observed.dims()
        )));
    }
    if !observed.is_finite() {
        return Err(Error::NonFinite("observed tensor"));
    }
    Ok(())
}

fn run(observed: &DenseTensor, mask: &Mask, cfg: &SolverConfig, robust: bool) -> Result<(DenseTensor, DenseTensor, SolveReport)> {
    check_inputs(observed, mask, cfg)?;
    let start = Instant::now();
    let dims = observed.dims().to_vec();
    let m = mask.project(observed);
    let transform = Transform::for_dims(cfg.transform.clone(), &dims)?;
    let ops = Operators::new(&cfg.regularizer, &dims)?;
    let gamma = ops.count() as f64;
    let lambda = cfg.resolved_lambda(&dims);
    if robust && !(lambda > 0.0) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
    }
    let zero = zeros_like(&m);
    let mut st = AdmmState {
        l: zero.clone(),
        e: zero.clone(),
        g: vec![zero.clone(); ops.count()],
        y: zero.clone(),
        lambda: vec![zero.clone(); ops.count()],
        kl: vec![zero.clone(); ops.count()],
        mu: cfg.mu0,
    };
    let mut history = Vec::new();
    let mut status = Status::MaxIters;
    for it in 1..=cfg.max_iters {
        let mu = st.mu;
        // L: (I + sum K^T K) L = M - E + Y/mu + sum K^T (G - Lambda/mu)
        let mut b = m.sub(&st.e)?;
        b.axpy(1.0 / mu, &st.y)?;
        let t: Vec<DenseTensor> = st
            .g
            .iter()
            .zip(&st.lambda)
            .map(|(g, lam)| {
                let mut x = g.clone();
                x.axpy(-1.0 / mu, lam)?;
                Ok(x)
            })
            .collect::<Result<_>>()?;
        let l_new = ops.solve(&b, &t)?;

        // G_k = D_{Phi, 1/(gamma mu)}(K_k L + Lambda_k / mu)
        let kl = ops.apply(&l_new)?;
        let targets: Vec<DenseTensor> = kl
            .iter()
            .zip(&st.lambda)
            .map(|(x, lam)| {
                let mut a = x.clone();
                a.axpy(1.0 / mu, lam)?;
                Ok(a)
            })
            .collect::<Result<_>>()?;
        let g_new = threshold_all(&targets, &transform, &cfg.phi, 1.0 / (gamma * mu), cfg.sketch.as_ref())?;

        // E: shrinkage on Omega (robust only), least squares copy of H off Omega.
        let mut h = m.sub(&l_new)?;
        h.axpy(1.0 / mu, &st.y)?;
        let e_omega = if robust {
            Some(gnhtt(&mask.project(&h), &cfg.psi, lambda / mu, cfg.structure)?)
        } else {
            None
        };
        let e_data: Vec<f64> = (0..h.len())
            .map(|i| {
                if mask.contains(i) {
                    e_omega.as_ref().map_or(0.0, |e| e.data()[i])
                } else {
                    h.data()[i]
                }
            })
            .collect();
        let e_new = DenseTensor::new(dims.clone(), e_data)?;

        // Multipliers and penalty growth.
        let mut y_new = st.y.clone();
        y_new.axpy(mu, &m.sub(&l_new)?.sub(&e_new)?)?;
        let lambda_new: Vec<DenseTensor> = st
            .lambda
            .iter()
            .zip(kl.iter().zip(&g_new))
            .map(|(lam, (k, g))| {
                let mut x = lam.clone();
                x.axpy(mu, &k.sub(g)?)?;
                Ok(x)
            })
            .collect::<Result<_>>()?;
        let next = AdmmState {
            l: l_new,
            e: e_new,
            g: g_new,
            y: y_new,
            lambda: lambda_new,
            kl,
            mu: (cfg.growth * mu).min(cfg.mu_max),
        };
        if !next.l.is_finite() {
            return Err(Error::NonFinite("ADMM low-rank iterate"));
        }
        let rec = kkt_diagnostics(&m, &st, &next, it)?;
        history.push(rec);
        st = next;
        if it % 25 == 0 {
            debug!("iter {it}: max residual {:.3e}, mu {:.3e}", rec.max_inf(), st.mu);
        }
        if rec.max_inf() <= cfg.tol && (!cfg.stop_frobenius || rec.max_step_fro() <= cfg.tol) {
            status = Status::Converged;
            break;
        }
    }
    let report = SolveReport {
        status,
        iterations: history.len(),
        history,
        wall_clock: start.elapsed(),
        final_mu: st.mu,
        lambda,
    };
    Ok((st.l, st.e, report))
}

/// Robust completion: `M = L + E` on the observed set, `L` low-rank and
/// smooth through the transform-domain penalty on its gradients, `E`
/// structured-sparse. Returns `(L, E, report)`.
pub fn gnrhtc(observed: &DenseTensor, mask: &Mask, cfg: &SolverConfig) -> Result<(DenseTensor, DenseTensor, SolveReport)> {
    run(observed, mask, cfg, true)
}

/// Noise-free completion: observed entries are trusted (`E = 0` there).
pub fn gnhtc(observed: &DenseTensor, mask: &Mask, cfg: &SolverConfig) -> Result<(DenseTensor, SolveReport)> {
    run(observed, mask, cfg, false).map(|(l, _, r)| (l, r))
}
