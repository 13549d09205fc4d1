//! Transform-domain t-product, T-SVD and the high-order tensor nuclear norm.
//!
//! Everything here works face by face on `L(X)`: each `n1 x n2` face of the
//! transformed tensor is an independent complex matrix. For transforms that
//! map real tensors to conjugate-paired faces (FFT) only one face of each
//! pair is factorized; its partner is the complex conjugate, which keeps the
//! inverse transform real.

use nalgebra::SVD;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{CMatrix, ComplexDenseTensor, DenseTensor, Matrix};
use crate::transform::Transform;

/// Thin SVD of one transform-domain face, singular values nonincreasing.
#[derive(Debug, Clone)]
pub(crate) struct FaceSvd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub vt: CMatrix,
}

fn svd_iter_budget(rows: usize, cols: usize) -> usize {
    200 * rows.min(cols) + 1000
}

/// Sorts nonincreasing (stable, so ties keep the backend's order) and makes
/// the first nonzero entry of every left singular vector real and positive.
fn normalize_svd(u: CMatrix, s: Vec<f64>, vt: CMatrix) -> FaceSvd {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut u_out = CMatrix::zeros(u.nrows(), s.len());
    let mut vt_out = CMatrix::zeros(s.len(), vt.ncols());
    let mut s_out = Vec::with_capacity(s.len());
    for (dst, &src) in order.iter().enumerate() {
        let col = u.column(src);
        let phase = col
            .iter()
            .find(|z| z.norm() > 1e-12)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(Complex64::new(1.0, 0.0));
        u_out.set_column(dst, &(col * phase));
        vt_out.set_row(dst, &(vt.row(src) * phase.conj()));
        s_out.push(s[src]);
    }
    FaceSvd {
        u: u_out,
        s: s_out,
        vt: vt_out,
    }
}

/// SVD of a face. `real` selects the real backend for faces known to be real.
pub(crate) fn face_svd(face: &CMatrix, real: bool, face_index: usize) -> Result<FaceSvd> {
    let (r, c) = face.shape();
    if real {
        let m = Matrix::from_fn(r, c, |i, j| face[(i, j)].re);
        let svd = SVD::try_new_unordered(m, true, true, f64::EPSILON, svd_iter_budget(r, c))
            .ok_or(Error::SvdNoConvergence { face: face_index })?;
        let u = svd.u.expect("u requested").map(|v| Complex64::new(v, 0.0));
        let vt = svd.v_t.expect("v_t requested").map(|v| Complex64::new(v, 0.0));
        Ok(normalize_svd(u, svd.singular_values.iter().copied().collect(), vt))
    } else {
        let svd = SVD::try_new_unordered(face.clone(), true, true, f64::EPSILON, svd_iter_budget(r, c))
            .ok_or(Error::SvdNoConvergence { face: face_index })?;
        Ok(normalize_svd(
            svd.u.expect("u requested"),
            svd.singular_values.iter().copied().collect(),
            svd.v_t.expect("v_t requested"),
        ))
    }
}

pub(crate) fn face_singular_values(face: &CMatrix, real: bool, face_index: usize) -> Result<Vec<f64>> {
    let (r, c) = face.shape();
    let mut s: Vec<f64> = if real {
        let m = Matrix::from_fn(r, c, |i, j| face[(i, j)].re);
        SVD::try_new_unordered(m, false, false, f64::EPSILON, svd_iter_budget(r, c))
            .ok_or(Error::SvdNoConvergence { face: face_index })?
            .singular_values
            .iter()
            .copied()
            .collect()
    } else {
        SVD::try_new_unordered(face.clone(), false, false, f64::EPSILON, svd_iter_budget(r, c))
            .ok_or(Error::SvdNoConvergence { face: face_index })?
            .singular_values
            .iter()
            .copied()
            .collect()
    };
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

/// Which faces to compute and how each remaining face is derived.
#[derive(Debug, Clone)]
pub(crate) struct FacePlan {
    /// Faces computed directly, with a flag telling whether the face is real.
    pub primary: Vec<(usize, bool)>,
    /// `partner[j]` is the computed face whose conjugate gives face `j`.
    pub partner: Vec<usize>,
}

impl FacePlan {
    pub fn new(l: &Transform) -> Self {
        let nf = l.num_faces();
        match l.conjugate_partners() {
            Some(partner) => {
                let primary = (0..nf)
                    .filter(|&j| j <= partner[j])
                    .map(|j| (j, partner[j] == j))
                    .collect();
                Self { primary, partner }
            }
            None => Self {
                primary: (0..nf).map(|j| (j, false)).collect(),
                partner: (0..nf).collect(),
            },
        }
    }
}

/// Applies `f` to every face of `L(X)` following the conjugate-pairing plan
/// and writes the (possibly reshaped) faces into a new transform-domain
/// tensor with `out_rows x out_cols` faces.
pub(crate) fn map_faces<F>(
    lx: &ComplexDenseTensor,
    plan: &FacePlan,
    out_rows: usize,
    out_cols: usize,
    f: F,
) -> Result<ComplexDenseTensor>
where
    F: Fn(usize, &CMatrix, bool) -> Result<CMatrix> + Sync,
{
    let computed: Vec<(usize, CMatrix)> = plan
        .primary
        .par_iter()
        .map(|&(j, real)| {
            let face = lx.face_matrix(j);
            f(j, &face, real).map(|m| (j, m))
        })
        .collect::<Result<_>>()?;
    let nf = plan.partner.len();
    let fl = out_rows * out_cols;
    let mut data = vec![Complex64::new(0.0, 0.0); fl * nf];
    let mut slot = vec![usize::MAX; nf];
    for (pos, (j, _)) in computed.iter().enumerate() {
        slot[*j] = pos;
    }
    for j in 0..nf {
        let dst = &mut data[j * fl..(j + 1) * fl];
        if slot[j] != usize::MAX {
            dst.copy_from_slice(computed[slot[j]].1.as_slice());
        } else {
            let src = &computed[slot[plan.partner[j]]].1;
            for (d, s) in dst.iter_mut().zip(src.as_slice()) {
                *d = s.conj();
            }
        }
    }
    let mut dims = lx.dims().to_vec();
    dims[0] = out_rows;
    dims[1] = out_cols;
    Ok(ComplexDenseTensor::from_parts(dims, data))
}

fn require_order3(x: &DenseTensor) -> Result<()> {
    if x.order() < 3 {
        return Err(Error::OrderTooLow {
            required: 3,
            order: x.order(),
        });
    }
    Ok(())
}

/// `X *_L Y` for `X: n1 x n2 x ...` and `Y: n2 x l x ...`.
pub fn tproduct(x: &DenseTensor, y: &DenseTensor, l: &Transform) -> Result<DenseTensor> {
    require_order3(x)?;
    require_order3(y)?;
    if x.dims()[1] != y.dims()[0] {
        return Err(Error::ShapeMismatch(format!(
            "inner dimensions differ: {:?} vs {:?}",
            x.dims(),
            y.dims()
        )));
    }
    if x.dims()[2..] != y.dims()[2..] {
        return Err(Error::ShapeMismatch(format!(
            "trailing modes differ: {:?} vs {:?}",
            x.dims(),
            y.dims()
        )));
    }
    let lx = l.apply(x)?;
    let ly = l.apply(y)?;
    let plan = FacePlan::new(l);
    let (n1, cols) = (x.dims()[0], y.dims()[1]);
    let prod = map_faces(&lx, &plan, n1, cols, |j, fx, _| Ok(fx * ly.face_matrix(j)))?;
    l.inverse(&prod)
}

/// Tensor transpose under `L`: every transform-domain face is replaced by
/// its conjugate transpose.
pub fn t_transpose(x: &DenseTensor, l: &Transform) -> Result<DenseTensor> {
    require_order3(x)?;
    let lx = l.apply(x)?;
    let plan = FacePlan::new(l);
    let t = map_faces(&lx, &plan, x.dims()[1], x.dims()[0], |_, f, _| Ok(f.adjoint()))?;
    l.inverse(&t)
}

/// Identity tensor `n x n x trailing` under `L` (every transformed face is `I_n`).
pub fn identity_tensor(n: usize, l: &Transform) -> Result<DenseTensor> {
    let mut dims = vec![n, n];
    dims.extend_from_slice(l.trailing());
    let nf = l.num_faces();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n * nf];
    for j in 0..nf {
        for i in 0..n {
            data[j * n * n + i + n * i] = Complex64::new(1.0, 0.0);
        }
    }
    l.inverse(&ComplexDenseTensor::from_parts(dims, data))
}

/// T-SVD factors `X = U *_L S *_L V^T`.
#[derive(Debug, Clone)]
pub struct TSVDFactors {
    pub u: DenseTensor,
    pub s: DenseTensor,
    pub v: DenseTensor,
    /// Transform-domain singular values, one nonincreasing list per face.
    pub singular_values: Vec<Vec<f64>>,
}

impl TSVDFactors {
    /// Number of singular tubes `S(i, i, :, ..., :)` that are nonzero, with
    /// "zero" meaning every transformed value at index `i` is at most
    /// `rel_tol * sigma_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let smax = self
            .singular_values
            .iter()
            .flat_map(|s| s.iter().copied())
            .fold(0.0f64, f64::max);
        if smax == 0.0 {
            return 0;
        }
        let m = self.singular_values.first().map_or(0, Vec::len);
        (0..m)
            .filter(|&i| self.singular_values.iter().any(|s| s[i] > rel_tol * smax))
            .count()
    }

    /// Rebuilds `U *_L S *_L V^T`.
    pub fn reconstruct(&self, l: &Transform) -> Result<DenseTensor> {
        let us = tproduct(&self.u, &self.s, l)?;
        tproduct(&us, &t_transpose(&self.v, l)?, l)
    }
}

/// Completes the orthonormal columns of `q` (n x m) to a full n x n unitary
/// matrix by Gram-Schmidt over the standard basis. Real input stays real.
fn complete_basis(q: &CMatrix) -> CMatrix {
    let n = q.nrows();
    let mut cols: Vec<nalgebra::DVector<Complex64>> =
        (0..q.ncols()).map(|j| q.column(j).into_owned()).collect();
    let mut e = 0;
    while cols.len() < n && e < n {
        let mut v = nalgebra::DVector::<Complex64>::zeros(n);
        v[e] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            cols.push(v / Complex64::new(nrm, 0.0));
        }
        e += 1;
    }
    CMatrix::from_columns(&cols)
}

/// Full T-SVD. Singular values are sorted nonincreasing per face and the
/// left singular vectors follow the first-nonzero-entry-positive convention.
pub fn tsvd(x: &DenseTensor, l: &Transform) -> Result<TSVDFactors> {
    require_order3(x)?;
    let (n1, n2) = (x.dims()[0], x.dims()[1]);
    let lx = l.apply(x)?;
    let plan = FacePlan::new(l);
    let nf = plan.partner.len();
    let svds: Vec<(usize, FaceSvd)> = plan
        .primary
        .par_iter()
        .map(|&(j, real)| face_svd(&lx.face_matrix(j), real, j).map(|s| (j, s)))
        .collect::<Result<_>>()?;
    let mut by_face: Vec<Option<&FaceSvd>> = vec![None; nf];
    for (j, s) in &svds {
        by_face[*j] = Some(s);
    }
    let mut u_data = Vec::with_capacity(n1 * n1 * nf);
    let mut s_data = Vec::with_capacity(n1 * n2 * nf);
    let mut v_data = Vec::with_capacity(n2 * n2 * nf);
    let mut singular_values = Vec::with_capacity(nf);
    for j in 0..nf {
        let (svd, conj) = match by_face[j] {
            Some(s) => (s, false),
            None => (by_face[plan.partner[j]].expect("partner computed"), true),
        };
        let mut uf = complete_basis(&svd.u);
        let mut vf = complete_basis(&svd.vt.adjoint());
        if conj {
            uf = uf.map(|z| z.conj());
            vf = vf.map(|z| z.conj());
        }
        u_data.extend_from_slice(uf.as_slice());
        v_data.extend_from_slice(vf.as_slice());
        let mut sf = CMatrix::zeros(n1, n2);
        for (i, &s) in svd.s.iter().enumerate() {
            sf[(i, i)] = Complex64::new(s, 0.0);
        }
        s_data.extend_from_slice(sf.as_slice());
        singular_values.push(svd.s.clone());
    }
    let trailing = l.trailing().to_vec();
    let dims_of = |a: usize, b: usize| {
        let mut d = vec![a, b];
        d.extend_from_slice(&trailing);
        d
    };
    let u = l.inverse(&ComplexDenseTensor::from_parts(dims_of(n1, n1), u_data))?;
    let s = l.inverse(&ComplexDenseTensor::from_parts(dims_of(n1, n2), s_data))?;
    let v = l.inverse(&ComplexDenseTensor::from_parts(dims_of(n2, n2), v_data))?;
    Ok(TSVDFactors {
        u,
        s,
        v,
        singular_values,
    })
}

/// Transform-domain singular values of every face (nonincreasing per face).
pub fn transformed_singular_values(x: &DenseTensor, l: &Transform) -> Result<Vec<Vec<f64>>> {
    require_order3(x)?;
    let lx = l.apply(x)?;
    let plan = FacePlan::new(l);
    let computed: Vec<(usize, Vec<f64>)> = plan
        .primary
        .par_iter()
        .map(|&(j, real)| face_singular_values(&lx.face_matrix(j), real, j).map(|s| (j, s)))
        .collect::<Result<_>>()?;
    let mut out: Vec<Vec<f64>> = vec![Vec::new(); plan.partner.len()];
    for (j, s) in computed {
        out[j] = s;
    }
    for j in 0..out.len() {
        if out[j].is_empty() {
            out[j] = out[plan.partner[j]].clone();
        }
    }
    Ok(out)
}

/// High-order tensor nuclear norm `(1/rho) * ||bdiag(L(X))||_*`.
pub fn htnn(x: &DenseTensor, l: &Transform) -> Result<f64> {
    let sv = transformed_singular_values(x, l)?;
    let total: f64 = sv.iter().flat_map(|s| s.iter()).sum();
    Ok(total / l.rho())
}
