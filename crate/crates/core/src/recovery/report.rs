use std::time::Duration;

use crate::error::Result;
use crate::tensor::DenseTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIters,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
        })
    }
}

/// Primal/dual iterate of the unquantized ADMM.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub l: DenseTensor,
    pub e: DenseTensor,
    pub g: Vec<DenseTensor>,
    pub y: DenseTensor,
    pub lambda: Vec<DenseTensor>,
    /// `K_k(L)`, cached for the feasibility residuals.
    pub kl: Vec<DenseTensor>,
    pub mu: f64,
}

/// Per-iteration residuals: the five sup-norm stopping quantities plus
/// Frobenius versions and multiplier norms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktRecord {
    pub iter: usize,
    pub mu: f64,
    pub dl_inf: f64,
    pub de_inf: f64,
    pub grad_feas_inf: f64,
    pub dg_inf: f64,
    pub feas_inf: f64,
    pub dl_fro: f64,
    pub de_fro: f64,
    pub dg_fro: f64,
    pub grad_feas_fro: f64,
    pub feas_fro: f64,
    pub y_fro: f64,
    pub lambda_fro: f64,
    /// `||L_new - L_old||_F / ||L_old||_F` (one-bit stopping rule).
    pub rel_change: f64,
}

impl KktRecord {
    /// Largest of the five stopping quantities.
    pub fn max_inf(&self) -> f64 {
        self.dl_inf
            .max(self.de_inf)
            .max(self.grad_feas_inf)
            .max(self.dg_inf)
            .max(self.feas_inf)
    }

    /// Largest successive-difference Frobenius norm over `L`, `E`, `G_k`.
    pub fn max_step_fro(&self) -> f64 {
        self.dl_fro.max(self.de_fro).max(self.dg_fro)
    }

    pub const CSV_HEADER: &'static str =
        "iter,mu,dl_inf,de_inf,grad_feas_inf,dg_inf,feas_inf,dl_fro,de_fro,dg_fro,grad_feas_fro,feas_fro,y_fro,lambda_fro,rel_change";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.iter,
            self.mu,
            self.dl_inf,
            self.de_inf,
            self.grad_feas_inf,
            self.dg_inf,
            self.feas_inf,
            self.dl_fro,
            self.de_fro,
            self.dg_fro,
            self.grad_feas_fro,
            self.feas_fro,
            self.y_fro,
            self.lambda_fro,
            self.rel_change
        )
    }
}

fn diff_norms(a: &DenseTensor, b: &DenseTensor) -> Result<(f64, f64)> {
    Ok((a.max_abs_diff(b)?, a.fro_dist(b)?))
}

/// Residual record between two consecutive iterates; `observed` is `M`.
pub fn kkt_diagnostics(observed: &DenseTensor, prev: &AdmmState, next: &AdmmState, iter: usize) -> Result<KktRecord> {
    let (dl_inf, dl_fro) = diff_norms(&next.l, &prev.l)?;
    let (de_inf, de_fro) = diff_norms(&next.e, &prev.e)?;
    let mut rec = KktRecord {
        iter,
        mu: next.mu,
        dl_inf,
        de_inf,
        dl_fro,
        de_fro,
        ..Default::default()
    };
    for k in 0..next.g.len() {
        let (gi, gf) = diff_norms(&next.kl[k], &next.g[k])?;
        rec.grad_feas_inf = rec.grad_feas_inf.max(gi);
        rec.grad_feas_fro = rec.grad_feas_fro.max(gf);
        let (di, df) = diff_norms(&next.g[k], &prev.g[k])?;
        rec.dg_inf = rec.dg_inf.max(di);
        rec.dg_fro = rec.dg_fro.max(df);
        rec.lambda_fro = rec.lambda_fro.max(next.lambda[k].fro_norm());
    }
    let feas = observed.sub(&next.l)?.sub(&next.e)?;
    rec.feas_inf = feas.max_abs();
    rec.feas_fro = feas.fro_norm();
    rec.y_fro = next.y.fro_norm();
    Ok(rec)
}

/// Run summary shared by all solvers.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: Status,
    pub iterations: usize,
    pub history: Vec<KktRecord>,
    pub wall_clock: Duration,
    pub final_mu: f64,
    /// Noise weight actually used.
    pub lambda: f64,
}

impl SolveReport {
    pub fn last(&self) -> Option<&KktRecord> {
        self.history.last()
    }

    /// History as CSV text (header plus one row per iteration).
    pub fn history_csv(&self) -> String {
        let mut s = String::from(KktRecord::CSV_HEADER);
        s.push('\n');
        for r in &self.history {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    }
}
