//! Dithered one-bit observations and the box-constrained ADMM solvers.

use std::time::Instant;

use log::{debug, warn};

use super::config::{Operators, SolverConfig};
use super::report::{KktRecord, SolveReport, Status};
use super::rhtc::threshold_all;
use crate::error::{Error, Result};
use crate::prox::scalar_prox_unchecked;
use crate::rng::SeededRng;
use crate::tensor::DenseTensor;
use crate::transform::Transform;

/// One-bit samples `(linear index, sign)` with per-entry aggregates
/// `J1 = theta * sum q` and `J2 = sample count`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    dims: Vec<usize>,
    theta: f64,
    samples: Vec<(usize, i8)>,
    j1: Vec<f64>,
    j2: Vec<f64>,
}

impl ObservationSet {
    pub fn new(dims: &[usize], theta: f64, samples: Vec<(usize, i8)>) -> Result<Self> {
        if !(theta > 0.0) {
            return Err(Error::InvalidParameter(format!("dither level must be positive, got {theta}")));
        }
        let n: usize = dims.iter().product();
        let mut j1 = vec![0.0; n];
        let mut j2 = vec![0.0; n];
        for &(i, q) in &samples {
            if i >= n || (q != 1 && q != -1) {
                return Err(Error::InvalidParameter(format!("bad sample ({i}, {q})")));
            }
            j1[i] += theta * q as f64;
            j2[i] += 1.0;
        }
        Ok(Self {
            dims: dims.to_vec(),
            theta,
            samples,
            j1,
            j2,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn samples(&self) -> &[(usize, i8)] {
        &self.samples
    }

    /// Number of samples `m`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn j1(&self) -> &[f64] {
        &self.j1
    }

    pub fn j2(&self) -> &[f64] {
        &self.j2
    }

    /// Per-entry mean of `theta * q`; unsampled entries get the global mean.
    pub fn naive_estimate(&self) -> DenseTensor {
        let total: f64 = self.j1.iter().sum();
        let global = if self.samples.is_empty() {
            0.0
        } else {
            total / self.samples.len() as f64
        };
        let data = self
            .j1
            .iter()
            .zip(&self.j2)
            .map(|(&s, &c)| if c > 0.0 { s / c } else { global })
            .collect();
        DenseTensor::new(self.dims.clone(), data).expect("valid dims")
    }
}

/// Draws `m` uniform-with-replacement entries of `L (+ S)`, adds
/// `N(0, sigma^2)` noise and a `U[-theta, theta]` dither, and keeps the sign
/// (`sign(0) = +1`).
pub fn onebit_observe(
    ltrue: &DenseTensor,
    m: usize,
    theta: f64,
    sigma: f64,
    seed: u64,
    sparse: Option<&DenseTensor>,
) -> Result<ObservationSet> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!("dither level must be positive, got {theta}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    if let Some(s) = sparse {
        ltrue.same_dims(s)?;
    }
    let bound = ltrue.max_abs() + 3.0 * sigma;
    if theta < bound {
        warn!("dither level {theta} below ||L||_inf + 3 sigma = {bound}");
    }
    let mut rng = SeededRng::new(seed);
    let n = ltrue.len();
    let samples = (0..m)
        .map(|_| {
            let i = rng.index(n);
            let mut y = ltrue.data()[i] + sparse.map_or(0.0, |s| s.data()[i]);
            if sigma > 0.0 {
                y += sigma * rng.normal();
            }
            let xi = rng.uniform_in(-theta, theta);
            (i, if y + xi >= 0.0 { 1 } else { -1 })
        })
        .collect();
    ObservationSet::new(ltrue.dims(), theta, samples)
}

/// Elementwise closed-form L-update of the one-bit models:
/// `clip((J1 - J2 S + m mu Z - m Y) / (J2 + m mu), -alpha, alpha)`.
pub fn onebit_l_update(
    obs: &ObservationSet,
    z: &DenseTensor,
    y: &DenseTensor,
    s: Option<&DenseTensor>,
    mu: f64,
    alpha: f64,
) -> DenseTensor {
    let m = obs.len() as f64;
    let data = (0..z.len())
        .map(|i| {
            let si = s.map_or(0.0, |s| s.data()[i]);
            let num = obs.j1[i] - obs.j2[i] * si + m * mu * z.data()[i] - m * y.data()[i];
            (num / (obs.j2[i] + m * mu)).clamp(-alpha, alpha)
        })
        .collect();
    DenseTensor::new(z.dims().to_vec(), data).expect("same dims")
}

/// Largest stationarity residual `|(J2 (L + S) - J1)/m + mu (L - Z) + Y|`
/// over entries strictly inside the box.
pub fn onebit_stationarity(
    obs: &ObservationSet,
    l: &DenseTensor,
    z: &DenseTensor,
    y: &DenseTensor,
    s: Option<&DenseTensor>,
    mu: f64,
    alpha: f64,
) -> f64 {
    let m = obs.len() as f64;
    (0..l.len())
        .filter(|&i| l.data()[i].abs() < alpha)
        .map(|i| {
            let li = l.data()[i];
            let si = s.map_or(0.0, |s| s.data()[i]);
            ((obs.j2[i] * (li + si) - obs.j1[i]) / m + mu * (li - z.data()[i]) + y.data()[i]).abs()
        })
        .fold(0.0, f64::max)
}

fn run(obs: &ObservationSet, cfg: &SolverConfig, alpha: f64, robust: bool) -> Result<(DenseTensor, DenseTensor, SolveReport)> {
    cfg.validate()?;
    if obs.is_empty() {
        return Err(Error::InvalidParameter("observation set is empty".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("box bound must be positive, got {alpha}")));
    }
    if robust && !(cfg.lambda2 > 0.0) {
        return Err(Error::InvalidConfig(format!("lambda2 must be positive, got {}", cfg.lambda2)));
    }
    let start = Instant::now();
    let dims = obs.dims().to_vec();
    let transform = Transform::for_dims(cfg.transform.clone(), &dims)?;
    let ops = Operators::new(&cfg.regularizer, &dims)?;
    let gamma = ops.count() as f64;
    let lambda = cfg.resolved_lambda(&dims);
    let m = obs.len() as f64;
    let zero = DenseTensor::zeros(&dims)?;
    let mut l = zero.clone();
    let mut s = zero.clone();
    let mut z = zero.clone();
    let mut y = zero.clone();
    let mut g = vec![zero.clone(); ops.count()];
    let mut lam = vec![zero.clone(); ops.count()];
    let mut mu = cfg.mu0;
    let mut history = Vec::new();
    let mut status = Status::MaxIters;
    for it in 1..=cfg.max_iters {
        let l_new = onebit_l_update(obs, &z, &y, robust.then_some(&s), mu, alpha);
        let s_new = if robust {
            let data = (0..l_new.len())
                .map(|i| {
                    let c = obs.j2[i];
                    if c == 0.0 {
                        0.0
                    } else {
                        scalar_prox_unchecked(&cfg.psi, cfg.lambda2 * m / c, obs.j1[i] / c - l_new.data()[i])
                    }
                })
                .collect();
            DenseTensor::new(dims.clone(), data)?
        } else {
            zero.clone()
        };

        // Z: (I + sum K^T K) Z = L + Y/mu + sum K^T (G - Lambda/mu)
        let mut b = l_new.clone();
        b.axpy(1.0 / mu, &y)?;
        let t: Vec<DenseTensor> = g
            .iter()
            .zip(&lam)
            .map(|(gk, lk)| {
                let mut x = gk.clone();
                x.axpy(-1.0 / mu, lk)?;
                Ok(x)
            })
            .collect::<Result<_>>()?;
        let z_new = ops.solve(&b, &t)?;

        let kz = ops.apply(&z_new)?;
        let targets: Vec<DenseTensor> = kz
            .iter()
            .zip(&lam)
            .map(|(k, lk)| {
                let mut a = k.clone();
                a.axpy(1.0 / mu, lk)?;
                Ok(a)
            })
            .collect::<Result<_>>()?;
        let g_new = threshold_all(&targets, &transform, &cfg.phi, lambda / (gamma * mu), cfg.sketch.as_ref())?;

        let lz = l_new.sub(&z_new)?;
        y.axpy(mu, &lz)?;
        let mut rec = KktRecord {
            iter: it,
            dl_inf: l_new.max_abs_diff(&l)?,
            dl_fro: l_new.fro_dist(&l)?,
            de_inf: s_new.max_abs_diff(&s)?,
            de_fro: s_new.fro_dist(&s)?,
            feas_inf: lz.max_abs(),
            feas_fro: lz.fro_norm(),
            ..Default::default()
        };
        for k in 0..g.len() {
            let diff = kz[k].sub(&g_new[k])?;
            lam[k].axpy(mu, &diff)?;
            rec.grad_feas_inf = rec.grad_feas_inf.max(diff.max_abs());
            rec.grad_feas_fro = rec.grad_feas_fro.max(diff.fro_norm());
            rec.dg_inf = rec.dg_inf.max(g_new[k].max_abs_diff(&g[k])?);
            rec.dg_fro = rec.dg_fro.max(g_new[k].fro_dist(&g[k])?);
            rec.lambda_fro = rec.lambda_fro.max(lam[k].fro_norm());
        }
        rec.y_fro = y.fro_norm();
        let lnorm = l.fro_norm();
        rec.rel_change = if lnorm > 0.0 { rec.dl_fro / lnorm } else { f64::INFINITY };
        mu = (cfg.growth * mu).min(cfg.mu_max);
        rec.mu = mu;
        if !l_new.is_finite() {
            return Err(Error::NonFinite("one-bit low-rank iterate"));
        }
        l = l_new;
        s = s_new;
        z = z_new;
        g = g_new;
        history.push(rec);
        if it % 25 == 0 {
            debug!("iter {it}: relative change {:.3e}, mu {:.3e}", rec.rel_change, mu);
        }
        if rec.rel_change <= cfg.tol {
            status = Status::Converged;
            break;
        }
    }
    let report = SolveReport {
        status,
        iterations: history.len(),
        history,
        wall_clock: start.elapsed(),
        final_mu: mu,
        lambda,
    };
    Ok((l, s, report))
}

/// One-bit completion with a box bound `alpha` on the recovered tensor.
pub fn gnobhtc(obs: &ObservationSet, cfg: &SolverConfig, alpha: f64) -> Result<(DenseTensor, SolveReport)> {
    run(obs, cfg, alpha, false).map(|(l, _, r)| (l, r))
}

/// Robust one-bit completion: additionally separates a sparse component
/// `S` (penalty `cfg.psi`, weight `cfg.lambda2`), zero off the sampled
/// support.
pub fn gnobrhtc(obs: &ObservationSet, cfg: &SolverConfig, alpha: f64) -> Result<(DenseTensor, DenseTensor, SolveReport)> {
    run(obs, cfg, alpha, true)
}
