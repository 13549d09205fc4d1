//! Structured shrinkage (GNHTT) and transform-domain singular value
//! thresholding (GNHTSVT).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gradient::grad;
use crate::prox::{scalar_prox_unchecked, Penalty};
use crate::tensor::{CMatrix, DenseTensor};
use crate::transform::Transform;
use crate::tsvd::{face_svd, map_faces, transformed_singular_values, FacePlan};

/// Group structure for the noise penalty: entries, tubes `X(i1, i2, :, ..)`
/// or face slices `X(:, :, i3, ..)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShrinkStructure {
    Entry,
    Tube,
    Slice,
}

impl fmt::Display for ShrinkStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShrinkStructure::Entry => "entry",
            ShrinkStructure::Tube => "tube",
            ShrinkStructure::Slice => "slice",
        })
    }
}

impl FromStr for ShrinkStructure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "entry" => Ok(ShrinkStructure::Entry),
            "tube" => Ok(ShrinkStructure::Tube),
            "slice" => Ok(ShrinkStructure::Slice),
            _ => Err(Error::InvalidParameter(format!("unknown structure '{s}'"))),
        }
    }
}

fn group_scale(p: &Penalty, lambda: f64, norm: f64) -> f64 {
    if norm == 0.0 {
        0.0
    } else {
        scalar_prox_unchecked(p, lambda, norm) / norm
    }
}

/// Generalized nonconvex shrinkage: each group `g` becomes
/// `g * prox(lambda, ||g||) / ||g||` (elementwise prox for `Entry`).
pub fn gnhtt(a: &DenseTensor, p: &Penalty, lambda: f64, s: ShrinkStructure) -> Result<DenseTensor> {
    p.validate()?;
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    if s != ShrinkStructure::Entry && a.order() < 3 {
        return Err(Error::OrderTooLow {
            required: 3,
            order: a.order(),
        });
    }
    let fl = if a.order() >= 2 { a.dims()[0] * a.dims()[1] } else { a.len() };
    let nf = a.len() / fl;
    let src = a.data();
    let data = match s {
        ShrinkStructure::Entry => src.iter().map(|&v| scalar_prox_unchecked(p, lambda, v)).collect(),
        ShrinkStructure::Tube => {
            let mut sq = vec![0.0; fl];
            for f in 0..nf {
                for (acc, v) in sq.iter_mut().zip(&src[f * fl..(f + 1) * fl]) {
                    *acc += v * v;
                }
            }
            let scale: Vec<f64> = sq.iter().map(|&e| group_scale(p, lambda, e.sqrt())).collect();
            src.iter().enumerate().map(|(i, &v)| v * scale[i % fl]).collect()
        }
        ShrinkStructure::Slice => src
            .chunks(fl)
            .flat_map(|face| {
                let norm = face.iter().map(|v| v * v).sum::<f64>().sqrt();
                let c = group_scale(p, lambda, norm);
                face.iter().map(move |&v| v * c)
            })
            .collect(),
    };
    Ok(DenseTensor::from_parts(a.dims().to_vec(), data))
}

/// Applies the prox to every transform-domain singular value of `A` and
/// reassembles `U *_L S' *_L V^T`.
pub fn gnhtsvt(a: &DenseTensor, l: &Transform, p: &Penalty, tau: f64) -> Result<DenseTensor> {
    p.validate()?;
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be >= 0, got {tau}")));
    }
    if a.order() < 3 {
        return Err(Error::OrderTooLow {
            required: 3,
            order: a.order(),
        });
    }
    if tau == 0.0 {
        return Ok(a.clone());
    }
    let la = l.apply(a)?;
    let plan = FacePlan::new(l);
    let (n1, n2) = (a.dims()[0], a.dims()[1]);
    let out = map_faces(&la, &plan, n1, n2, |j, face, real| {
        let svd = face_svd(face, real, j)?;
        let shrunk: Vec<f64> = svd.s.iter().map(|&s| scalar_prox_unchecked(p, tau, s)).collect();
        let keep = shrunk.iter().take_while(|&&s| s > 0.0).count();
        let mut res = CMatrix::zeros(n1, n2);
        if keep > 0 {
            let mut us = svd.u.columns(0, keep).into_owned();
            for (c, &s) in shrunk.iter().take(keep).enumerate() {
                us.column_mut(c).scale_mut(s);
            }
            res = us * svd.vt.rows(0, keep);
        }
        Ok(res)
    })?;
    l.inverse(&out)
}

/// Diagnostic value `(1/gamma) sum_k (1/rho) sum phi(sigma)` of the
/// transform-domain singular values of the gradient tensors along `modes`.
pub fn gnhtctv(a: &DenseTensor, l: &Transform, p: &Penalty, modes: &[usize]) -> Result<f64> {
    if modes.is_empty() {
        return Err(Error::InvalidConfig("gradient mode set is empty".into()));
    }
    let mut total = 0.0;
    for &k in modes {
        let g = grad(a, k)?;
        let sv = transformed_singular_values(&g, l)?;
        total += sv.iter().flatten().map(|&s| p.phi(s)).sum::<f64>() / l.rho();
    }
    Ok(total / modes.len() as f64)
}

/// GNHTSVT applied to several tensors in parallel.
#[allow(dead_code)]
pub(crate) fn gnhtsvt_many(
    inputs: &[DenseTensor],
    l: &Transform,
    p: &Penalty,
    tau: f64,
) -> Result<Vec<DenseTensor>> {
    inputs.par_iter().map(|a| gnhtsvt(a, l, p, tau)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::tsvd::transformed_singular_values;

    #[test]
    fn gnhtt_basic_cases() {
        let z = DenseTensor::zeros(&[3, 2, 4]).unwrap();
        for s in [ShrinkStructure::Entry, ShrinkStructure::Tube, ShrinkStructure::Slice] {
            assert_eq!(gnhtt(&z, &Penalty::L1, 1.0, s).unwrap().max_abs(), 0.0);
        }
        let mut rng = SeededRng::new(3);
        let a = rng.normal_tensor(&[3, 2, 4]);
        let e = gnhtt(&a, &Penalty::L1, 0.5, ShrinkStructure::Entry).unwrap();
        for (x, v) in e.data().iter().zip(a.data()) {
            assert_eq!(*x, v.signum() * (v.abs() - 0.5).max(0.0));
        }
        // One tube of norm 3 along the trailing mode.
        let mut t = DenseTensor::zeros(&[2, 2, 2]).unwrap();
        let idx = [t.linear_index(&[1, 0, 0]), t.linear_index(&[1, 0, 1])];
        let mut data = t.clone().into_data();
        data[idx[0]] = 3.0 * 0.6;
        data[idx[1]] = 3.0 * 0.8;
        t = DenseTensor::new(vec![2, 2, 2], data).unwrap();
        let r = gnhtt(&t, &Penalty::L1, 1.0, ShrinkStructure::Tube).unwrap();
        for (i, (&x, &v)) in r.data().iter().zip(t.data()).enumerate() {
            if idx.contains(&i) {
                assert!((x - v * 2.0 / 3.0).abs() < 1e-14);
            } else {
                assert_eq!(x, 0.0);
            }
        }
        assert!(gnhtt(&DenseTensor::zeros(&[3, 3]).unwrap(), &Penalty::L1, 1.0, ShrinkStructure::Tube).is_err());
    }

    #[test]
    fn gnhtsvt_identity_at_zero_tau() {
        let mut rng = SeededRng::new(4);
        let a = rng.normal_tensor(&[5, 4, 3]);
        let l = Transform::fft(&[3]).unwrap();
        let out = gnhtsvt(&a, &l, &Penalty::Mcp { gamma: 2.0 }, 0.0).unwrap();
        assert!(out.max_abs_diff(&a).unwrap() <= 1e-10);
    }

    #[test]
    fn gnhtsvt_maps_singular_values() {
        let mut rng = SeededRng::new(5);
        let a = rng.normal_tensor(&[8, 6, 5]);
        let l = Transform::fft(&[5]).unwrap();
        let p = Penalty::Scad { a: 3.7 };
        let tau = 0.9;
        let out = gnhtsvt(&a, &l, &p, tau).unwrap();
        let sin = transformed_singular_values(&a, &l).unwrap();
        let sout = transformed_singular_values(&out, &l).unwrap();
        for (fi, fo) in sin.iter().zip(&sout) {
            for (i, o) in fi.iter().zip(fo) {
                assert!((p.prox(tau, *i) - o).abs() <= 1e-9);
            }
        }
    }
}
