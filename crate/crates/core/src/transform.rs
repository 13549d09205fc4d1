//! Invertible linear transforms acting on modes 3..d.
//!
//! A transform is a list of per-mode matrices `U_i` with `U_i U_i^H = alpha_i I`.
//! Applying it is the chain of mode products `X x_3 U_3 ... x_d U_d`; the
//! inverse uses `U_i^{-1} = U_i^H / alpha_i` in reverse mode order. The
//! scaling constant `rho = prod alpha_i` relates energies:
//! `||L(X)||_F^2 = rho ||X||_F^2`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::{
    mode_product_raw, multi_index, split_at_mode, CMatrix, ComplexDenseTensor, DenseTensor,
};

/// Relative imaginary residue above which an inverse transform is rejected.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum TransformKind {
    /// Unnormalized DFT along every transform mode, `alpha_i = n_i`.
    Fft,
    /// Orthonormal DCT-II along every transform mode, `alpha_i = 1`.
    Dct,
    /// User-supplied matrices, unitary up to scale.
    Explicit,
}

#[derive(Clone)]
pub struct Transform {
    kind: TransformKind,
    /// Lengths of modes 3..d.
    trailing: Vec<usize>,
    /// Dense mode matrices (DCT / explicit only).
    matrices: Vec<CMatrix>,
    alphas: Vec<f64>,
    real_matrices: bool,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform")
            .field("kind", &self.kind)
            .field("trailing", &self.trailing)
            .field("alphas", &self.alphas)
            .finish()
    }
}

impl Transform {
    /// FFT along each trailing mode (lengths of modes 3..d).
    pub fn fft(trailing: &[usize]) -> Result<Self> {
        check_trailing(trailing)?;
        Ok(Self {
            kind: TransformKind::Fft,
            trailing: trailing.to_vec(),
            matrices: Vec::new(),
            alphas: trailing.iter().map(|&n| n as f64).collect(),
            real_matrices: false,
        })
    }

    /// Orthonormal DCT-II along each trailing mode.
    pub fn dct(trailing: &[usize]) -> Result<Self> {
        check_trailing(trailing)?;
        let matrices = trailing.iter().map(|&n| dct_matrix(n)).collect();
        Ok(Self {
            kind: TransformKind::Dct,
            trailing: trailing.to_vec(),
            matrices,
            alphas: vec![1.0; trailing.len()],
            real_matrices: true,
        })
    }

    /// Explicit square matrices, one per trailing mode. Each must satisfy
    /// `U U^H = alpha I` within 1e-10 (relative to alpha) for some `alpha > 0`.
    pub fn explicit(matrices: Vec<CMatrix>) -> Result<Self> {
        let mut alphas = Vec::with_capacity(matrices.len());
        for (i, u) in matrices.iter().enumerate() {
            let n = u.nrows();
            if n == 0 || u.ncols() != n {
                return Err(Error::TransformMismatch(format!(
                    "mode {} matrix is {}x{}, expected square",
                    i + 3,
                    u.nrows(),
                    u.ncols()
                )));
            }
            let alpha = u.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
            if alpha <= 0.0 || !alpha.is_finite() {
                return Err(Error::NotScaledUnitary {
                    mode: i + 3,
                    deviation: f64::INFINITY,
                });
            }
            let gram = u * u.adjoint();
            let mut dev = 0.0f64;
            for r in 0..n {
                for c in 0..n {
                    let target = if r == c { alpha } else { 0.0 };
                    dev = dev.max((gram[(r, c)] - Complex64::new(target, 0.0)).norm() / alpha);
                }
            }
            if dev > 1e-10 {
                return Err(Error::NotScaledUnitary {
                    mode: i + 3,
                    deviation: dev,
                });
            }
            alphas.push(alpha);
        }
        let real_matrices = matrices.iter().all(|u| u.iter().all(|z| z.im == 0.0));
        Ok(Self {
            kind: TransformKind::Explicit,
            trailing: matrices.iter().map(|u| u.nrows()).collect(),
            matrices,
            alphas,
            real_matrices,
        })
    }

    /// Transform of the given kind sized for a tensor of shape `dims`.
    pub fn for_dims(kind: TransformKind, dims: &[usize]) -> Result<Self> {
        if dims.len() < 3 {
            return Err(Error::OrderTooLow {
                required: 3,
                order: dims.len(),
            });
        }
        match kind {
            TransformKind::Fft => Self::fft(&dims[2..]),
            TransformKind::Dct => Self::dct(&dims[2..]),
            TransformKind::Explicit => Err(Error::TransformMismatch(
                "explicit transforms need their matrices; use Transform::explicit".into(),
            )),
        }
    }

    /// Same kind, resized for new trailing lengths. Explicit transforms can
    /// only be "resized" to their own lengths.
    pub fn resized(&self, trailing: &[usize]) -> Result<Self> {
        if trailing == self.trailing.as_slice() {
            return Ok(self.clone());
        }
        match self.kind {
            TransformKind::Fft => Self::fft(trailing),
            TransformKind::Dct => Self::dct(trailing),
            TransformKind::Explicit => Err(Error::TransformMismatch(
                "explicit transform cannot be resized".into(),
            )),
        }
    }

    pub fn kind(&self) -> &TransformKind {
        &self.kind
    }

    pub fn trailing(&self) -> &[usize] {
        &self.trailing
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn rho(&self) -> f64 {
        self.alphas.iter().product()
    }

    pub fn num_faces(&self) -> usize {
        self.trailing.iter().product()
    }

    fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if dims.len() < 3 {
            return Err(Error::OrderTooLow {
                required: 3,
                order: dims.len(),
            });
        }
        if dims[2..] != self.trailing[..] {
            return Err(Error::TransformMismatch(format!(
                "tensor trailing modes {:?} vs transform {:?}",
                &dims[2..],
                self.trailing
            )));
        }
        Ok(())
    }

    /// For each transform-domain face, the face holding its complex conjugate
    /// when the input is real. `None` when no such pairing is guaranteed
    /// (complex explicit matrices).
    pub fn conjugate_partners(&self) -> Option<Vec<usize>> {
        let nf = self.num_faces();
        match self.kind {
            TransformKind::Fft => Some(
                (0..nf)
                    .map(|j| {
                        let idx = multi_index(&self.trailing, j);
                        let mut lin = 0;
                        for (i, n) in idx.iter().zip(&self.trailing).rev() {
                            lin = lin * n + (n - i) % n;
                        }
                        lin
                    })
                    .collect(),
            ),
            _ if self.real_matrices => Some((0..nf).collect()),
            _ => None,
        }
    }

    /// `L(X)`: forward transform of a real tensor.
    pub fn apply(&self, x: &DenseTensor) -> Result<ComplexDenseTensor> {
        self.check_dims(x.dims())?;
        let mut out = x.to_complex();
        self.apply_in_place(&mut out, FftDirection::Forward);
        Ok(out)
    }

    /// `L(Y)` for complex input (used for spectra of complex tensors).
    pub fn apply_complex(&self, y: &ComplexDenseTensor) -> Result<ComplexDenseTensor> {
        self.check_dims(y.dims())?;
        let mut out = y.clone();
        self.apply_in_place(&mut out, FftDirection::Forward);
        Ok(out)
    }

    /// `L^{-1}(Y)` without the realness check.
    pub fn inverse_complex(&self, y: &ComplexDenseTensor) -> Result<ComplexDenseTensor> {
        self.check_dims(y.dims())?;
        let mut out = y.clone();
        self.apply_in_place(&mut out, FftDirection::Inverse);
        Ok(out)
    }

    /// `L^{-1}(Y)` followed by real-part extraction. Returns the real tensor
    /// and the Frobenius norm of the discarded imaginary part.
    pub fn inverse_with_residue(&self, y: &ComplexDenseTensor) -> Result<(DenseTensor, f64)> {
        let out = self.inverse_complex(y)?;
        let mut residue = 0.0;
        let data: Vec<f64> = out
            .data()
            .iter()
            .map(|z| {
                residue += z.im * z.im;
                z.re
            })
            .collect();
        let t = DenseTensor::new(out.dims().to_vec(), data)?;
        Ok((t, residue.sqrt()))
    }

    /// `L^{-1}(Y)`; errors when the imaginary residue exceeds
    /// `IMAG_RESIDUE_TOL * ||L^{-1}(Y)||_F`.
    pub fn inverse(&self, y: &ComplexDenseTensor) -> Result<DenseTensor> {
        let (t, residue) = self.inverse_with_residue(y)?;
        let scale = (t.fro_norm().powi(2) + residue * residue).sqrt();
        let limit = IMAG_RESIDUE_TOL * scale;
        if residue > limit {
            return Err(Error::ImaginaryResidue { residue, limit });
        }
        Ok(t)
    }

    fn apply_in_place(&self, t: &mut ComplexDenseTensor, dir: FftDirection) {
        let order = t.order();
        let modes: Vec<usize> = match dir {
            FftDirection::Forward => (2..order).collect(),
            FftDirection::Inverse => (2..order).rev().collect(),
        };
        for k in modes {
            let i = k - 2;
            match self.kind {
                TransformKind::Fft => {
                    fft_along_mode(t, k, dir);
                    if dir == FftDirection::Inverse {
                        let s = 1.0 / self.trailing[i] as f64;
                        t.data_mut().iter_mut().for_each(|z| *z *= s);
                    }
                }
                _ => {
                    let u = &self.matrices[i];
                    let m: DMatrix<Complex64> = match dir {
                        FftDirection::Forward => u.clone(),
                        FftDirection::Inverse => u.adjoint() / Complex64::new(self.alphas[i], 0.0),
                    };
                    let (dims, data) = mode_product_raw(t.dims(), t.data(), &m, k);
                    *t = ComplexDenseTensor::from_parts(dims, data);
                }
            }
        }
    }
}

fn check_trailing(trailing: &[usize]) -> Result<()> {
    if trailing.is_empty() {
        return Err(Error::OrderTooLow {
            required: 3,
            order: 2,
        });
    }
    if trailing.iter().any(|&n| n == 0) {
        return Err(Error::InvalidDims("zero-length transform mode".into()));
    }
    Ok(())
}

/// Orthonormal DCT-II matrix, `C C^T = I`.
pub fn dct_matrix(n: usize) -> CMatrix {
    let nf = n as f64;
    CMatrix::from_fn(n, n, |k, j| {
        let s = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        let v = s * (std::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2.0 * nf)).cos();
        Complex64::new(v, 0.0)
    })
}

/// Unnormalized 1-D DFT along mode `k` of a complex tensor, in place.
pub(crate) fn fft_along_mode(t: &mut ComplexDenseTensor, k: usize, dir: FftDirection) {
    let (left, nk, right) = split_at_mode(t.dims(), k);
    if nk == 1 {
        return;
    }
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft(nk, dir);
    let data = t.data_mut();
    if left == 1 {
        // Lines are already contiguous.
        fft.process(data);
        return;
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); left * nk];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for r in 0..right {
        let block = &mut data[r * left * nk..(r + 1) * left * nk];
        for ik in 0..nk {
            for l in 0..left {
                buf[l * nk + ik] = block[l + left * ik];
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for ik in 0..nk {
            for l in 0..left {
                block[l + left * ik] = buf[l * nk + ik];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn length_one_fft_is_identity() {
        let mut rng = SeededRng::new(1);
        let x = rng.normal_tensor(&[3, 4, 1, 1]);
        let t = Transform::fft(&[1, 1]).unwrap();
        let y = t.apply(&x).unwrap();
        for (a, b) in y.data().iter().zip(x.data()) {
            assert_eq!(a.re, *b);
            assert_eq!(a.im, 0.0);
        }
        assert_eq!(t.rho(), 1.0);
    }

    #[test]
    fn roundtrip_and_energy() {
        for seed in 0..50 {
            let mut rng = SeededRng::new(seed);
            let x = rng.normal_tensor(&[4, 4, 8]);
            for t in [Transform::fft(&[8]).unwrap(), Transform::dct(&[8]).unwrap()] {
                let y = t.apply(&x).unwrap();
                let back = t.inverse(&y).unwrap();
                assert!(back.max_abs_diff(&x).unwrap() <= 1e-12);
                let ratio = y.fro_norm().powi(2) / x.fro_norm().powi(2);
                assert!((ratio - t.rho()).abs() / t.rho() <= 1e-10);
            }
        }
    }

    #[test]
    fn inverse_of_zero_is_zero() {
        let t = Transform::fft(&[4]).unwrap();
        let z = DenseTensor::zeros(&[2, 2, 4]).unwrap().to_complex();
        let back = t.inverse(&z).unwrap();
        assert!(back.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_built_spectrum_inverts() {
        // Tube (i1, i2) of X holds x_t = a + b cos(pi t / 2) + c (-1)^t for
        // t = 0..3; its DFT is [4a + 2c'..] computed below by the direct sum.
        let x = DenseTensor::from_fn(&[2, 2, 4], |i| {
            let base = (i[0] + 2 * i[1]) as f64 + 1.0;
            let t = i[2] as f64;
            base + 0.5 * (std::f64::consts::FRAC_PI_2 * t).cos() - 0.25 * (-1f64).powi(i[2] as i32)
        })
        .unwrap();
        let mut spectrum = vec![Complex64::new(0.0, 0.0); 16];
        for i1 in 0..2 {
            for i2 in 0..2 {
                for f in 0..4 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for t in 0..4 {
                        let w = Complex64::from_polar(
                            1.0,
                            -2.0 * std::f64::consts::PI * (f * t) as f64 / 4.0,
                        );
                        acc += w * x.get(&[i1, i2, t]);
                    }
                    spectrum[i1 + 2 * i2 + 4 * f] = acc;
                }
            }
        }
        let t = Transform::fft(&[4]).unwrap();
        let y = ComplexDenseTensor::new(vec![2, 2, 4], spectrum).unwrap();
        let back = t.inverse(&y).unwrap();
        assert!(back.max_abs_diff(&x).unwrap() <= 1e-12);
    }

    #[test]
    fn corrupted_spectrum_is_rejected() {
        let t = Transform::fft(&[4]).unwrap();
        let mut data = vec![Complex64::new(0.0, 0.0); 16];
        data[4] = Complex64::new(1.0, 0.0); // frequency 1 without its conjugate
        let y = ComplexDenseTensor::new(vec![2, 2, 4], data).unwrap();
        assert!(matches!(t.inverse(&y), Err(Error::ImaginaryResidue { .. })));
    }

    #[test]
    fn explicit_matrices_are_validated() {
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
            ],
        );
        let t = Transform::explicit(vec![h]).unwrap();
        assert!((t.rho() - 2.0).abs() < 1e-15);
        let bad = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(
            Transform::explicit(vec![bad]),
            Err(Error::NotScaledUnitary { mode: 3, .. })
        ));
    }

    #[test]
    fn dims_mismatch_is_an_error() {
        let t = Transform::fft(&[5]).unwrap();
        let x = DenseTensor::zeros(&[2, 2, 4]).unwrap();
        assert!(matches!(t.apply(&x), Err(Error::TransformMismatch(_))));
        assert!(matches!(
            t.apply(&DenseTensor::zeros(&[2, 2]).unwrap()),
            Err(Error::OrderTooLow { .. })
        ));
    }

    #[test]
    fn fft_partners_are_conjugate_faces() {
        let mut rng = SeededRng::new(4);
        let x = rng.normal_tensor(&[2, 3, 4, 3]);
        let t = Transform::fft(&[4, 3]).unwrap();
        let y = t.apply(&x).unwrap();
        let partners = t.conjugate_partners().unwrap();
        let fl = 6;
        for (j, &p) in partners.iter().enumerate() {
            for e in 0..fl {
                let a = y.data()[j * fl + e];
                let b = y.data()[p * fl + e];
                assert!((a - b.conj()).norm() < 1e-12);
            }
        }
    }
}
