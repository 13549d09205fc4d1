//! Circulant forward differences along tensor modes and the FFT-diagonalized
//! solver for `(I + sum_k D_k^T D_k) L = rhs`.
//!
//! Modes are 0-based throughout. The difference along mode `k` maps a fiber
//! `x` to `x[(i + 1) % n] - x[i]`, i.e. a mode-k product with the row
//! circulant matrix generated by `(-1, 1, 0, ..., 0)`.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::tensor::{split_at_mode, ComplexDenseTensor, DenseTensor};
use crate::transform::fft_along_mode;

fn check_mode(x: &DenseTensor, k: usize) -> Result<()> {
    if k >= x.order() {
        return Err(Error::ModeOutOfRange {
            mode: k,
            order: x.order(),
        });
    }
    Ok(())
}

/// Forward circulant difference along mode `k`.
pub fn grad(x: &DenseTensor, k: usize) -> Result<DenseTensor> {
    check_mode(x, k)?;
    let (left, n, right) = split_at_mode(x.dims(), k);
    let src = x.data();
    let mut out = vec![0.0; src.len()];
    if n > 1 {
        for r in 0..right {
            let base = r * left * n;
            for i in 0..n {
                let next = if i + 1 == n { 0 } else { i + 1 };
                let (a, b) = (base + left * i, base + left * next);
                for l in 0..left {
                    out[a + l] = src[b + l] - src[a + l];
                }
            }
        }
    }
    Ok(DenseTensor::from_parts(x.dims().to_vec(), out))
}

/// Adjoint of [`grad`]: `(D^T y)[i] = y[i - 1] - y[i]`.
pub fn grad_adjoint(y: &DenseTensor, k: usize) -> Result<DenseTensor> {
    check_mode(y, k)?;
    let (left, n, right) = split_at_mode(y.dims(), k);
    let src = y.data();
    let mut out = vec![0.0; src.len()];
    if n > 1 {
        for r in 0..right {
            let base = r * left * n;
            for i in 0..n {
                let prev = if i == 0 { n - 1 } else { i - 1 };
                let (a, b) = (base + left * i, base + left * prev);
                for l in 0..left {
                    out[a + l] = src[b + l] - src[a + l];
                }
            }
        }
    }
    Ok(DenseTensor::from_parts(y.dims().to_vec(), out))
}

/// Eigenvalue of the mode-`k` circulant difference at frequency `j`:
/// `exp(2 pi i j / n) - 1`.
pub fn frequency_response(n: usize, j: usize) -> Complex64 {
    let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
    Complex64::new(t.cos() - 1.0, t.sin())
}

/// The smoothness directions `Gamma` together with the precomputed
/// frequency-domain denominator `1 + sum_k 4 sin^2(pi j_k / n_k)`.
#[derive(Debug, Clone)]
pub struct GradientSet {
    dims: Vec<usize>,
    modes: Vec<usize>,
    denom: Vec<f64>,
}

impl GradientSet {
    pub fn new(dims: &[usize], modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidConfig("gradient mode set is empty".into()));
        }
        let mut sorted = modes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != modes.len() {
            return Err(Error::InvalidConfig("gradient modes repeat".into()));
        }
        if let Some(&k) = sorted.iter().find(|&&k| k >= dims.len()) {
            return Err(Error::ModeOutOfRange {
                mode: k,
                order: dims.len(),
            });
        }
        let total: usize = dims.iter().product();
        let mut denom = vec![1.0; total];
        for &k in modes {
            let (left, n, right) = split_at_mode(dims, k);
            let w: Vec<f64> = (0..n)
                .map(|j| (2.0 * (std::f64::consts::PI * j as f64 / n as f64).sin()).powi(2))
                .collect();
            for r in 0..right {
                for (i, wi) in w.iter().enumerate() {
                    let start = r * left * n + left * i;
                    for d in &mut denom[start..start + left] {
                        *d += wi;
                    }
                }
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
            modes: modes.to_vec(),
            denom,
        })
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    /// `gamma = |Gamma|`.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Frequency-domain denominator, column-major over the full index space.
    pub fn denominator(&self) -> &[f64] {
        &self.denom
    }

    /// `(I + sum_k D_k^T D_k) x`, the operator the solver inverts.
    pub fn apply_operator(&self, x: &DenseTensor) -> Result<DenseTensor> {
        let mut out = x.clone();
        for &k in &self.modes {
            out.axpy(1.0, &grad_adjoint(&grad(x, k)?, k)?)?;
        }
        Ok(out)
    }

    /// Right-hand side `B + sum_k D_k^T Gt_k` (one `Gt` per mode, same order).
    pub fn rhs(&self, b: &DenseTensor, gt: &[DenseTensor]) -> Result<DenseTensor> {
        self.check(b)?;
        if gt.len() != self.modes.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} gradient terms for {} modes",
                gt.len(),
                self.modes.len()
            )));
        }
        let mut rhs = b.clone();
        for (&k, g) in self.modes.iter().zip(gt) {
            self.check(g)?;
            rhs.axpy(1.0, &grad_adjoint(g, k)?)?;
        }
        Ok(rhs)
    }

    /// Solves `(I + sum_k D_k^T D_k) L = B + sum_k D_k^T Gt_k`.
    pub fn solve(&self, b: &DenseTensor, gt: &[DenseTensor]) -> Result<DenseTensor> {
        let rhs = self.rhs(b, gt)?;
        self.solve_operator(&rhs)
    }

    /// Applies the inverse operator to an assembled right-hand side.
    pub fn solve_operator(&self, rhs: &DenseTensor) -> Result<DenseTensor> {
        self.check(rhs)?;
        let mut t: ComplexDenseTensor = rhs.to_complex();
        let d = self.dims.len();
        for k in 0..d {
            fft_along_mode(&mut t, k, FftDirection::Forward);
        }
        for (z, &w) in t.data_mut().iter_mut().zip(&self.denom) {
            *z /= w;
        }
        for k in 0..d {
            fft_along_mode(&mut t, k, FftDirection::Inverse);
        }
        let scale = 1.0 / rhs.len() as f64;
        let data = t.data().iter().map(|z| z.re * scale).collect();
        Ok(DenseTensor::from_parts(self.dims.clone(), data))
    }

    fn check(&self, x: &DenseTensor) -> Result<()> {
        if x.dims() != self.dims.as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "tensor dims {:?} differ from gradient set dims {:?}",
                x.dims(),
                self.dims
            )));
        }
        Ok(())
    }
}

/// One-shot form of [`GradientSet::solve`].
pub fn solve_grad_system(b: &DenseTensor, gt: &[DenseTensor], modes: &[usize]) -> Result<DenseTensor> {
    GradientSet::new(b.dims(), modes)?.solve(b, gt)
}
