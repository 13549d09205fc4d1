//! Dense order-d tensors in column-major storage.
//!
//! Element `(i_1, ..., i_d)` lives at `i_1 + n_1 (i_2 + n_2 (i_3 + ...))`. The
//! mode-k unfolding has `n_k` rows and lists the remaining indices in
//! ascending mode order with the lowest mode varying fastest, so that
//! [`fold`] inverts [`unfold`] exactly.
//!
//! Face slices are the `n_1 x n_2` slabs indexed by the trailing modes; face
//! `j` is the contiguous block `data[j*n1*n2 .. (j+1)*n1*n2]`.

use nalgebra::{ComplexField, DMatrix, DMatrixView, DMatrixViewMut};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real matrix in column-major storage.
pub type Matrix = DMatrix<f64>;
/// Complex matrix in column-major storage.
pub type CMatrix = DMatrix<Complex64>;

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("order must be at least 1".into()));
    }
    if dims.iter().any(|&n| n == 0) {
        return Err(Error::InvalidDims(format!("zero-length mode in {dims:?}")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::InvalidDims(format!("element count overflows for {dims:?}")))
}

/// Splits `dims` around mode `k` into (product of leading modes, n_k, product of trailing modes).
pub(crate) fn split_at_mode(dims: &[usize], k: usize) -> (usize, usize, usize) {
    let left: usize = dims[..k].iter().product();
    let right: usize = dims[k + 1..].iter().product();
    (left, dims[k], right)
}

/// Real order-d tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    /// Builds a tensor from column-major data. Rejects empty modes, length
    /// mismatches and non-finite entries.
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "data length {} does not match dims {:?} ({} elements)",
                data.len(),
                dims,
                len
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("DenseTensor::new"));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            data: vec![0.0; len],
        })
    }

    pub fn filled(dims: &[usize], value: f64) -> Result<Self> {
        let mut t = Self::zeros(dims)?;
        t.data.fill(value);
        Ok(t)
    }

    /// Builds a tensor by evaluating `f` at every multi-index (0-based).
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_dims(dims)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..len {
            data.push(f(&idx));
            for (i, n) in idx.iter_mut().zip(dims) {
                *i += 1;
                if *i < *n {
                    break;
                }
                *i = 0;
            }
        }
        Self::new(dims.to_vec(), data)
    }

    /// Internal constructor for kernels whose output is finite by construction.
    pub(crate) fn from_parts(dims: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dims.iter().product::<usize>());
        Self { dims, data }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        linear_index(&self.dims, idx)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    /// Number of `n1 x n2` face slices (1 for order < 3).
    pub fn num_faces(&self) -> usize {
        self.dims.iter().skip(2).product()
    }

    /// Size of one face slice, `n1 * n2` (or the full length for order < 3).
    pub fn face_len(&self) -> usize {
        self.dims.iter().take(2).product()
    }

    pub fn face(&self, j: usize) -> &[f64] {
        let fl = self.face_len();
        &self.data[j * fl..(j + 1) * fl]
    }

    pub fn same_dims(&self, other: &DenseTensor) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(format!(
                "dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, c: f64) -> DenseTensor {
        Self::from_parts(self.dims.clone(), self.data.iter().map(|x| c * x).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseTensor {
        Self::from_parts(self.dims.clone(), self.data.iter().map(|&x| f(x)).collect())
    }

    /// Elementwise `f(self, other)`; dims must agree.
    pub fn zip_map(&self, other: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<DenseTensor> {
        self.same_dims(other)?;
        Ok(Self::from_parts(
            self.dims.clone(),
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_map(other, |a, b| a - b)
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &DenseTensor) -> Result<()> {
        self.same_dims(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    /// Max-abs difference, the `||A - B||_inf` used by the stopping rules.
    pub fn max_abs_diff(&self, other: &DenseTensor) -> Result<f64> {
        self.same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn fro_dist(&self, other: &DenseTensor) -> Result<f64> {
        self.same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn to_complex(&self) -> ComplexDenseTensor {
        ComplexDenseTensor::from_parts(
            self.dims.clone(),
            self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Reinterprets the data under new dims with the same element count.
    pub fn reshape(&self, dims: Vec<usize>) -> Result<DenseTensor> {
        let len = check_dims(&dims)?;
        if len != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "cannot reshape {:?} into {:?}",
                self.dims, dims
            )));
        }
        Ok(Self::from_parts(dims, self.data.clone()))
    }
}

pub(crate) fn linear_index(dims: &[usize], idx: &[usize]) -> usize {
    debug_assert_eq!(dims.len(), idx.len());
    let mut lin = 0;
    for (i, n) in idx.iter().zip(dims).rev() {
        debug_assert!(i < n);
        lin = lin * n + i;
    }
    lin
}

pub(crate) fn multi_index(dims: &[usize], mut lin: usize) -> Vec<usize> {
    dims.iter()
        .map(|&n| {
            let i = lin % n;
            lin /= n;
            i
        })
        .collect()
}

/// Complex order-d tensor; holds transform-domain data.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexDenseTensor {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl ComplexDenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "data length {} does not match dims {:?}",
                data.len(),
                dims
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("ComplexDenseTensor::new"));
        }
        Ok(Self { dims, data })
    }

    pub(crate) fn from_parts(dims: Vec<usize>, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), dims.iter().product::<usize>());
        Self { dims, data }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn num_faces(&self) -> usize {
        self.dims.iter().skip(2).product()
    }

    pub fn face_len(&self) -> usize {
        self.dims.iter().take(2).product()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Face `j` as an `n1 x n2` matrix.
    pub fn face_matrix(&self, j: usize) -> CMatrix {
        let (n1, n2) = (self.dims[0], self.dims.get(1).copied().unwrap_or(1));
        let fl = n1 * n2;
        CMatrix::from_column_slice(n1, n2, &self.data[j * fl..(j + 1) * fl])
    }
}

/// Mode-k unfolding (0-based `k`).
pub fn unfold(x: &DenseTensor, k: usize) -> Result<Matrix> {
    if k >= x.order() {
        return Err(Error::ModeOutOfRange {
            mode: k,
            order: x.order(),
        });
    }
    let (left, nk, right) = split_at_mode(x.dims(), k);
    let cols = left * right;
    let mut out = vec![0.0; nk * cols];
    let src = x.data();
    for r in 0..right {
        for ik in 0..nk {
            let base = left * (ik + nk * r);
            for l in 0..left {
                out[ik + nk * (l + left * r)] = src[base + l];
            }
        }
    }
    Ok(Matrix::from_vec(nk, cols, out))
}

/// Inverse of [`unfold`]: rebuilds a tensor of shape `dims` from its mode-k unfolding.
pub fn fold(m: &Matrix, k: usize, dims: &[usize]) -> Result<DenseTensor> {
    check_dims(dims)?;
    if k >= dims.len() {
        return Err(Error::ModeOutOfRange {
            mode: k,
            order: dims.len(),
        });
    }
    let (left, nk, right) = split_at_mode(dims, k);
    if m.nrows() != nk || m.ncols() != left * right {
        return Err(Error::ShapeMismatch(format!(
            "matrix {}x{} cannot fold into mode {} of {:?}",
            m.nrows(),
            m.ncols(),
            k,
            dims
        )));
    }
    let src = m.as_slice();
    let mut out = vec![0.0; nk * left * right];
    for r in 0..right {
        for ik in 0..nk {
            let base = left * (ik + nk * r);
            for l in 0..left {
                out[base + l] = src[ik + nk * (l + left * r)];
            }
        }
    }
    Ok(DenseTensor::from_parts(dims.to_vec(), out))
}

/// Blocked mode product on raw column-major data: the tensor is viewed as
/// `right` consecutive `left x n_k` blocks, each multiplied by `U^T`.
pub(crate) fn mode_product_raw<T: ComplexField + Copy>(
    dims: &[usize],
    data: &[T],
    u: &DMatrix<T>,
    k: usize,
) -> (Vec<usize>, Vec<T>) {
    let (left, nk, right) = split_at_mode(dims, k);
    let m = u.nrows();
    debug_assert_eq!(u.ncols(), nk);
    let mut out_dims = dims.to_vec();
    out_dims[k] = m;
    let mut out = vec![T::zero(); left * m * right];
    if left == 1 {
        // Mode-1 style: the data already is the n_k x right unfolding.
        let x = DMatrixView::from_slice(data, nk, right);
        let mut y = DMatrixViewMut::from_slice(&mut out, m, right);
        y.gemm(T::one(), u, &x, T::zero());
    } else {
        let ut = u.transpose();
        for r in 0..right {
            let x = DMatrixView::from_slice(&data[r * left * nk..(r + 1) * left * nk], left, nk);
            let mut y =
                DMatrixViewMut::from_slice(&mut out[r * left * m..(r + 1) * left * m], left, m);
            y.gemm(T::one(), &x, &ut, T::zero());
        }
    }
    (out_dims, out)
}

/// Mode-k product `X x_k U`; the result replaces `n_k` by `U.nrows()`.
pub fn mode_product(x: &DenseTensor, u: &Matrix, k: usize) -> Result<DenseTensor> {
    if k >= x.order() {
        return Err(Error::ModeOutOfRange {
            mode: k,
            order: x.order(),
        });
    }
    if u.ncols() != x.dims()[k] {
        return Err(Error::ShapeMismatch(format!(
            "U has {} columns but mode {} has length {}",
            u.ncols(),
            k,
            x.dims()[k]
        )));
    }
    if u.nrows() == 0 {
        return Err(Error::InvalidDims("mode product with a zero-row matrix".into()));
    }
    let (dims, data) = mode_product_raw(x.dims(), x.data(), u, k);
    Ok(DenseTensor::from_parts(dims, data))
}

/// Norms of a tensor. `tube1` and `slice1` are `None` for order < 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub fro: f64,
    pub l1: f64,
    pub tube1: Option<f64>,
    pub slice1: Option<f64>,
}

pub fn norms(x: &DenseTensor) -> Norms {
    let fro = x.fro_norm();
    let l1 = x.data().iter().map(|v| v.abs()).sum();
    let (tube1, slice1) = if x.order() >= 3 {
        (Some(tube1_norm(x)), Some(slice1_norm(x)))
    } else {
        (None, None)
    };
    Norms {
        fro,
        l1,
        tube1,
        slice1,
    }
}

/// Sum over `(i1, i2)` of the Frobenius norm of tube `X(i1, i2, :, ..., :)`.
pub fn tube1_norm(x: &DenseTensor) -> f64 {
    tube_norms(x).iter().sum()
}

/// Sum over faces of the face Frobenius norm.
pub fn slice1_norm(x: &DenseTensor) -> f64 {
    (0..x.num_faces())
        .map(|j| x.face(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .sum()
}

pub(crate) fn tube_norms(x: &DenseTensor) -> Vec<f64> {
    let fl = x.face_len();
    let mut sq = vec![0.0; fl];
    for face in x.data().chunks_exact(fl) {
        for (s, v) in sq.iter_mut().zip(face) {
            *s += v * v;
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// Like [`norms`] but errors when tube/slice norms are requested on order < 3.
pub fn group_norms(x: &DenseTensor) -> Result<(f64, f64)> {
    if x.order() < 3 {
        return Err(Error::OrderTooLow {
            required: 3,
            order: x.order(),
        });
    }
    Ok((tube1_norm(x), slice1_norm(x)))
}

/// Frobenius inner product `sum x*y`.
pub fn inner(x: &DenseTensor, y: &DenseTensor) -> Result<f64> {
    x.same_dims(y)?;
    Ok(x.data().iter().zip(y.data()).map(|(a, b)| a * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn seq(dims: &[usize]) -> DenseTensor {
        let n: usize = dims.iter().product();
        DenseTensor::new(dims.to_vec(), (1..=n).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn unfold_mode1_and_mode3_follow_column_major_convention() {
        let x = seq(&[2, 2, 2]);
        let m1 = unfold(&x, 0).unwrap();
        assert_eq!(
            m1,
            Matrix::from_row_slice(2, 4, &[1., 3., 5., 7., 2., 4., 6., 8.])
        );
        let m3 = unfold(&x, 2).unwrap();
        assert_eq!(
            m3,
            Matrix::from_row_slice(2, 4, &[1., 2., 3., 4., 5., 6., 7., 8.])
        );
        let back = fold(&m1, 0, &[2, 2, 2]).unwrap();
        assert_eq!(back.data(), x.data());
    }

    #[test]
    fn fold_roundtrips_bit_exactly() {
        let mut rng = SeededRng::new(0);
        let x = rng.normal_tensor(&[3, 4, 5]);
        for k in 0..3 {
            let back = fold(&unfold(&x, k).unwrap(), k, x.dims()).unwrap();
            assert_eq!(back, x);
        }
        for seed in 0..100 {
            let mut rng = SeededRng::new(seed);
            let m = rng.normal_matrix(4, 15);
            let t = fold(&m, 1, &[3, 4, 5]).unwrap();
            assert_eq!(unfold(&t, 1).unwrap(), m);
        }
        let z = fold(&Matrix::zeros(4, 15), 1, &[3, 4, 5]).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unfold_fold_errors() {
        let x = seq(&[2, 3]);
        assert!(matches!(
            unfold(&x, 2),
            Err(Error::ModeOutOfRange { mode: 2, order: 2 })
        ));
        assert!(matches!(
            fold(&Matrix::zeros(3, 3), 0, &[2, 3]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn construction_rejects_empty_and_nonfinite() {
        assert!(DenseTensor::zeros(&[2, 0, 3]).is_err());
        assert!(DenseTensor::zeros(&[]).is_err());
        assert!(DenseTensor::new(vec![2], vec![1.0, f64::NAN]).is_err());
        assert!(DenseTensor::new(vec![2], vec![1.0]).is_err());
    }

    #[test]
    fn mode_product_identity_and_ones_row() {
        let mut rng = SeededRng::new(3);
        let x = rng.normal_tensor(&[3, 4, 5]);
        for k in 0..3 {
            let id = Matrix::identity(x.dims()[k], x.dims()[k]);
            assert_eq!(mode_product(&x, &id, k).unwrap(), x);
        }
        let ones = Matrix::from_element(1, 4, 1.0);
        let s = mode_product(&x, &ones, 1).unwrap();
        assert_eq!(s.dims(), &[3, 1, 5]);
        for i in 0..3 {
            for k in 0..5 {
                let direct: f64 = (0..4).map(|j| x.get(&[i, j, k])).sum();
                assert!((s.get(&[i, 0, k]) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mode_product_matches_unfold_multiply_fold() {
        let mut rng = SeededRng::new(11);
        let x = rng.normal_tensor(&[4, 3, 5, 2]);
        for k in 0..4 {
            let u = rng.normal_matrix(6, x.dims()[k]);
            let fast = mode_product(&x, &u, k).unwrap();
            let mut dims = x.dims().to_vec();
            dims[k] = 6;
            let slow = fold(&(&u * unfold(&x, k).unwrap()), k, &dims).unwrap();
            assert!(fast.max_abs_diff(&slow).unwrap() <= 1e-12);
        }
        assert!(mode_product(&x, &Matrix::zeros(2, 7), 0).is_err());
    }

    #[test]
    fn norms_of_ones_and_zero() {
        let ones = DenseTensor::filled(&[2, 2, 2], 1.0).unwrap();
        let n = norms(&ones);
        assert!((n.fro - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(n.l1, 8.0);
        assert!((n.tube1.unwrap() - 4.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((n.slice1.unwrap() - 4.0).abs() < 1e-14);
        let z = norms(&DenseTensor::zeros(&[2, 3, 4]).unwrap());
        assert_eq!((z.fro, z.l1, z.tube1, z.slice1), (0.0, 0.0, Some(0.0), Some(0.0)));
        assert!(group_norms(&DenseTensor::zeros(&[2, 3]).unwrap()).is_err());
    }

    #[test]
    fn norms_match_brute_force() {
        let mut rng = SeededRng::new(5);
        let x = rng.normal_tensor(&[3, 4, 2, 3]);
        let d = x.dims().to_vec();
        let mut tube = 0.0;
        for i1 in 0..d[0] {
            for i2 in 0..d[1] {
                let mut s = 0.0;
                for i3 in 0..d[2] {
                    for i4 in 0..d[3] {
                        s += x.get(&[i1, i2, i3, i4]).powi(2);
                    }
                }
                tube += s.sqrt();
            }
        }
        let mut slice = 0.0;
        for i3 in 0..d[2] {
            for i4 in 0..d[3] {
                let mut s = 0.0;
                for i1 in 0..d[0] {
                    for i2 in 0..d[1] {
                        s += x.get(&[i1, i2, i3, i4]).powi(2);
                    }
                }
                slice += s.sqrt();
            }
        }
        let n = norms(&x);
        assert!((n.tube1.unwrap() - tube).abs() / tube <= 1e-13);
        assert!((n.slice1.unwrap() - slice).abs() / slice <= 1e-13);
    }

    #[test]
    fn inner_product_basics() {
        let mut rng = SeededRng::new(9);
        let x = rng.normal_tensor(&[3, 4, 5]);
        let y = rng.normal_tensor(&[3, 4, 5]);
        let z = DenseTensor::zeros(&[3, 4, 5]).unwrap();
        assert_eq!(inner(&x, &z).unwrap(), 0.0);
        assert!((inner(&x, &x).unwrap() - x.fro_norm().powi(2)).abs() < 1e-12);
        let mut oracle = 0.0;
        for i in 0..x.len() {
            oracle += x.data()[i] * y.data()[i];
        }
        assert!((inner(&x, &y).unwrap() - oracle).abs() < 1e-12);
        assert!(inner(&x, &DenseTensor::zeros(&[3, 4]).unwrap()).is_err());
    }

    #[test]
    fn linear_and_multi_index_agree() {
        let dims = [3, 4, 5];
        for lin in 0..60 {
            assert_eq!(linear_index(&dims, &multi_index(&dims, lin)), lin);
        }
    }
}
