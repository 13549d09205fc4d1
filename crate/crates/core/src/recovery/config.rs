use crate::error::{Error, Result};
use crate::gradient::{grad, grad_adjoint, GradientSet};
use crate::prox::Penalty;
use crate::sketch::SketchConfig;
use crate::tensor::DenseTensor;
use crate::threshold::ShrinkStructure;
use crate::transform::TransformKind;

/// Which linear maps feed the transform-domain low-rank penalty.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularizer {
    /// Gradient tensors along every mode.
    GradientAll,
    /// Gradient tensors along the listed (0-based) modes.
    Gradient(Vec<usize>),
    /// The penalty acts on `L` itself (no gradient chain).
    LowRank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Penalty on transform-domain singular values.
    pub phi: Penalty,
    /// Penalty on the sparse/noise component.
    pub psi: Penalty,
    pub structure: ShrinkStructure,
    pub regularizer: Regularizer,
    /// Noise weight; `None` selects `xi / sqrt(max(n1, n2) * n3 * ... * nd)`.
    pub lambda: Option<f64>,
    pub xi: f64,
    /// Sparse weight of the robust one-bit model.
    pub lambda2: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub growth: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// Also require the successive-difference Frobenius norms of `L`, `E`
    /// and every `G_k` to fall below `tol` before stopping.
    pub stop_frobenius: bool,
    pub transform: TransformKind,
    /// When set, every GNHTSVT call is replaced by its sketched version.
    pub sketch: Option<SketchConfig>,
}

impl SolverConfig {
    /// Defaults for the unquantized solvers.
    pub fn new(phi: Penalty, psi: Penalty) -> Self {
        Self {
            phi,
            psi,
            structure: ShrinkStructure::Entry,
            regularizer: Regularizer::GradientAll,
            lambda: None,
            xi: 1.5,
            lambda2: 1.0,
            mu0: 1e-3,
            mu_max: 1e10,
            growth: 1.1,
            tol: 1e-4,
            max_iters: 500,
            stop_frobenius: true,
            transform: TransformKind::Fft,
            sketch: None,
        }
    }

    /// Defaults for the one-bit solvers. The sample-averaged data term is
    /// much weaker than the unquantized fit, hence the smaller `xi`.
    pub fn onebit(phi: Penalty, psi: Penalty) -> Self {
        Self {
            xi: 0.4,
            mu0: 1e-6,
            mu_max: 1e3,
            growth: 1.05,
            ..Self::new(phi, psi)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.phi.validate()?;
        self.psi.validate()?;
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.mu0 > 0.0) {
            return bad(format!("mu0 must be positive, got {}", self.mu0));
        }
        if !(self.mu_max >= self.mu0) {
            return bad(format!("mu_max {} below mu0 {}", self.mu_max, self.mu0));
        }
        if !(self.growth > 1.0) {
            return bad(format!("growth rate must exceed 1, got {}", self.growth));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tol));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0) {
                return bad(format!("lambda must be positive, got {l}"));
            }
        }
        if !(self.xi > 0.0) {
            return bad(format!("xi must be positive, got {}", self.xi));
        }
        if let Regularizer::Gradient(m) = &self.regularizer {
            if m.is_empty() {
                return bad("gradient mode set is empty".into());
            }
        }
        Ok(())
    }

    /// `lambda`, or the dimension-scaled default.
    pub fn resolved_lambda(&self, dims: &[usize]) -> f64 {
        self.lambda.unwrap_or_else(|| default_lambda(self.xi, dims))
    }
}

/// `xi / sqrt(max(n1, n2) * prod_{i >= 3} n_i)`.
pub fn default_lambda(xi: f64, dims: &[usize]) -> f64 {
    let head = dims.iter().take(2).copied().max().unwrap_or(1);
    let tail: usize = dims.iter().skip(2).product();
    xi / ((head * tail) as f64).sqrt()
}

/// The maps `K_k` with penalty on `K_k(L)`, plus the matching solver for
/// `(I + sum_k K_k^T K_k) L = rhs`.
#[derive(Debug, Clone)]
pub(crate) enum Operators {
    Gradient(GradientSet),
    Identity,
}

impl Operators {
    pub fn new(reg: &Regularizer, dims: &[usize]) -> Result<Self> {
        match reg {
            Regularizer::GradientAll => {
                let modes: Vec<usize> = (0..dims.len()).collect();
                Ok(Operators::Gradient(GradientSet::new(dims, &modes)?))
            }
            Regularizer::Gradient(m) => Ok(Operators::Gradient(GradientSet::new(dims, m)?)),
            Regularizer::LowRank => Ok(Operators::Identity),
        }
    }

    /// `gamma`, the number of penalized maps.
    pub fn count(&self) -> usize {
        match self {
            Operators::Gradient(g) => g.len(),
            Operators::Identity => 1,
        }
    }

    pub fn apply(&self, x: &DenseTensor) -> Result<Vec<DenseTensor>> {
        match self {
            Operators::Gradient(g) => g.modes().iter().map(|&k| grad(x, k)).collect(),
            Operators::Identity => Ok(vec![x.clone()]),
        }
    }

    /// `b + sum_k K_k^T t_k`.
    pub fn rhs(&self, b: &DenseTensor, t: &[DenseTensor]) -> Result<DenseTensor> {
        let mut out = b.clone();
        match self {
            Operators::Gradient(g) => {
                for (&k, tk) in g.modes().iter().zip(t) {
                    out.axpy(1.0, &grad_adjoint(tk, k)?)?;
                }
            }
            Operators::Identity => out.axpy(1.0, &t[0])?,
        }
        Ok(out)
    }

    /// Solves `(I + sum_k K_k^T K_k) L = b + sum_k K_k^T t_k`.
    pub fn solve(&self, b: &DenseTensor, t: &[DenseTensor]) -> Result<DenseTensor> {
        let rhs = self.rhs(b, t)?;
        match self {
            Operators::Gradient(g) => g.solve_operator(&rhs),
            Operators::Identity => Ok(rhs.scale(0.5)),
        }
    }
}
