//! Column-pivoted Householder QR and the deflated QR built on it.

use crate::tensor::Matrix;

/// `A P = Q R` with Businger-Golub column-norm pivoting.
///
/// Returns the thin `Q` (m x k, k = min(m, n)), the `k x n` upper
/// trapezoidal `R` and the permutation (`perm[j]` is the original column
/// stored at position `j`). `|R(j, j)|` is nonincreasing in `j`.
pub fn pivoted_qr(a: &Matrix) -> (Matrix, Matrix, Vec<usize>) {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k);
    for j in 0..k {
        let mut best = j;
        let mut best_norm = -1.0;
        for c in j..n {
            let nrm: f64 = w.view((j, c), (m - j, 1)).norm_squared();
            if nrm > best_norm {
                best_norm = nrm;
                best = c;
            }
        }
        if best != j {
            w.swap_columns(j, best);
            perm.swap(j, best);
        }
        let x: Vec<f64> = (j..m).map(|i| w[(i, j)]).collect();
        let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            reflectors.push((vec![0.0; m - j], 0.0));
            continue;
        }
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        let beta = 2.0 / vnorm2;
        for c in j..n {
            let dot: f64 = (j..m).map(|i| v[i - j] * w[(i, c)]).sum();
            let s = beta * dot;
            for i in j..m {
                w[(i, c)] -= s * v[i - j];
            }
        }
        for i in j + 1..m {
            w[(i, j)] = 0.0;
        }
        w[(j, j)] = alpha;
        reflectors.push((v, beta));
    }
    let mut q = Matrix::zeros(m, k);
    for i in 0..k {
        q[(i, i)] = 1.0;
    }
    for j in (0..k).rev() {
        let (v, beta) = &reflectors[j];
        if *beta == 0.0 {
            continue;
        }
        for c in 0..k {
            let dot: f64 = (j..m).map(|i| v[i - j] * q[(i, c)]).sum();
            let s = beta * dot;
            for i in j..m {
                q[(i, c)] -= s * v[i - j];
            }
        }
    }
    let r = w.rows(0, k).into_owned();
    (q, r, perm)
}

/// Output of [`defl_qr`]: `A ~ Q R` with `Q` of width `s`.
#[derive(Debug, Clone)]
pub struct DeflatedQr {
    pub q: Matrix,
    pub r: Matrix,
    pub s: usize,
}

/// Deflated QR: pivoted QR truncated after the last diagonal entry of `R`
/// with magnitude at least `delta`. `R` is returned in the original column
/// order. `s = 0` gives a zero-width `Q` and a `0 x n` `R`.
pub fn defl_qr(a: &Matrix, delta: f64) -> DeflatedQr {
    let (m, n) = a.shape();
    let (qt, rt, perm) = pivoted_qr(a);
    let k = m.min(n);
    let s = (0..k).rev().find(|&i| rt[(i, i)].abs() >= delta).map_or(0, |i| i + 1);
    let q = qt.columns(0, s).into_owned();
    let mut r = Matrix::zeros(s, n);
    for (pos, &orig) in perm.iter().enumerate() {
        for i in 0..s {
            r[(i, orig)] = rt[(i, pos)];
        }
    }
    DeflatedQr { q, r, s }
}

/// Thin orthonormal basis of the columns of `a` (Householder, no pivoting).
pub(crate) fn orthonormal_columns(a: &Matrix) -> Matrix {
    let (m, n) = a.shape();
    if n == 0 || m == 0 {
        return Matrix::zeros(m, 0);
    }
    a.clone().qr().q().columns(0, m.min(n)).into_owned()
}

/// Extends orthonormal columns `q` to `target` columns by Gram-Schmidt over
/// the standard basis (two passes per candidate).
pub(crate) fn complete_columns(q: &Matrix, target: usize) -> Matrix {
    let n = q.nrows();
    let mut cols: Vec<nalgebra::DVector<f64>> = (0..q.ncols()).map(|j| q.column(j).into_owned()).collect();
    let mut e = 0;
    while cols.len() < target.min(n) && e < n {
        let mut v = nalgebra::DVector::<f64>::zeros(n);
        v[e] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let p = c.dot(&v);
                v.axpy(-p, c, 1.0);
            }
        }
        let nrm = v.norm();
        if nrm > 1e-8 {
            cols.push(v / nrm);
        }
        e += 1;
    }
    if cols.is_empty() {
        return Matrix::zeros(n, 0);
    }
    Matrix::from_columns(&cols)
}
