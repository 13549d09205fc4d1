//! Tucker factor containers, sketch configuration and the deterministic
//! STHOSVD baseline.

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::tensor::{mode_product, unfold, DenseTensor, Matrix};

/// `X ~ core x_1 F_1 ... x_d F_d`. A `None` factor is the identity (mode not
/// compressed). A `None` core means every entry is zero with some rank 0.
#[derive(Debug, Clone)]
pub struct TuckerFactors {
    pub(crate) dims: Vec<usize>,
    pub(crate) core: Option<DenseTensor>,
    pub(crate) factors: Vec<Option<Matrix>>,
}

impl TuckerFactors {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn core(&self) -> Option<&DenseTensor> {
        self.core.as_ref()
    }

    pub fn factors(&self) -> &[Option<Matrix>] {
        &self.factors
    }

    /// Per-mode ranks (full size for uncompressed modes).
    pub fn ranks(&self) -> Vec<usize> {
        self.factors
            .iter()
            .zip(&self.dims)
            .map(|(f, &n)| f.as_ref().map_or(n, |m| m.ncols()))
            .collect()
    }

    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let Some(core) = &self.core else {
            return DenseTensor::zeros(&self.dims);
        };
        let mut x = core.clone();
        for (k, f) in self.factors.iter().enumerate() {
            if let Some(f) = f {
                x = mode_product(&x, f, k)?;
            }
        }
        Ok(x)
    }

    pub(crate) fn zero(dims: &[usize], factors: Vec<Option<Matrix>>) -> Self {
        Self {
            dims: dims.to_vec(),
            core: None,
            factors,
        }
    }
}

/// Sketch family and its per-family parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum SketchMode {
    /// Block Krylov iteration with target ranks `r_i`, block sizes `b_i` and
    /// Krylov depths `q_i` (one entry per tensor mode; entries of modes that
    /// are not processed are ignored).
    FixedRank {
        ranks: Vec<usize>,
        blocks: Vec<usize>,
        depths: Vec<usize>,
    },
    /// Block Lanczos bidiagonalization stopped at relative tolerance `eps`.
    /// `delta = None` selects `1e-10 * ||A||_F` per mode.
    FixedAccuracy {
        eps: f64,
        block: usize,
        delta: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchConfig {
    pub mode: SketchMode,
    /// Modes to compress, in processing order. Other modes keep identity
    /// factors.
    pub order: Vec<usize>,
    pub seed: u64,
}

impl SketchConfig {
    /// Fixed-rank sketch with `b_i = ceil(r_i / 4)` and `q_i = 4`.
    pub fn fixed_rank(ranks: Vec<usize>, order: Vec<usize>, seed: u64) -> Self {
        let blocks = ranks.iter().map(|&r| r.div_ceil(4).max(1)).collect();
        let depths = vec![4; ranks.len()];
        Self {
            mode: SketchMode::FixedRank { ranks, blocks, depths },
            order,
            seed,
        }
    }

    pub fn fixed_accuracy(eps: f64, block: usize, order: Vec<usize>, seed: u64) -> Self {
        Self {
            mode: SketchMode::FixedAccuracy { eps, block, delta: None },
            order,
            seed,
        }
    }

    /// Compress flags derived from the processing order.
    pub fn compress_flags(&self, order: usize) -> Vec<bool> {
        (0..order).map(|k| self.order.contains(&k)).collect()
    }

    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        let d = dims.len();
        let mut seen = vec![false; d];
        for &k in &self.order {
            if k >= d {
                return Err(Error::ModeOutOfRange { mode: k, order: d });
            }
            if seen[k] {
                return Err(Error::InvalidSketch(format!("mode {k} repeated in processing order")));
            }
            seen[k] = true;
        }
        match &self.mode {
            SketchMode::FixedRank { ranks, blocks, depths } => {
                if ranks.len() != d || blocks.len() != d || depths.len() != d {
                    return Err(Error::InvalidSketch(format!(
                        "ranks/blocks/depths need {d} entries each"
                    )));
                }
                for &k in &self.order {
                    let (r, b, q) = (ranks[k], blocks[k], depths[k]);
                    if r == 0 || r > dims[k] {
                        return Err(Error::InvalidSketch(format!(
                            "rank {r} out of range for mode {k} of size {}",
                            dims[k]
                        )));
                    }
                    if b == 0 || b > r {
                        return Err(Error::InvalidSketch(format!("block {b} must lie in 1..={r} (mode {k})")));
                    }
                    if (q + 1) * b < r {
                        return Err(Error::InvalidSketch(format!(
                            "(q+1)*b = {} below rank {r} (mode {k})",
                            (q + 1) * b
                        )));
                    }
                }
            }
            SketchMode::FixedAccuracy { eps, block, delta } => {
                if !(*eps > 0.0 && *eps < 1.0) {
                    return Err(Error::InvalidSketch(format!("eps must lie in (0, 1), got {eps}")));
                }
                if *block == 0 {
                    return Err(Error::InvalidSketch("block size must be positive".into()));
                }
                if let Some(dl) = delta {
                    if !(*dl > 0.0) {
                        return Err(Error::InvalidSketch(format!("delta must be positive, got {dl}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Top `r` left singular vectors of `a`, columns in nonincreasing order.
pub(crate) fn leading_left_singular_vectors(a: &Matrix, r: usize) -> Matrix {
    let svd = SVD::new(a.clone(), true, false);
    let u = svd.u.expect("u requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].partial_cmp(&svd.singular_values[x]).unwrap());
    let cols: Vec<_> = order.iter().take(r).map(|&j| u.column(j).into_owned()).collect();
    let out = Matrix::from_columns(&cols);
    if out.ncols() < r {
        super::qr::complete_columns(&out, r)
    } else {
        out
    }
}

/// Sequentially truncated HOSVD with ranks `r` (one per mode) over `order`.
pub fn sthosvd(x: &DenseTensor, ranks: &[usize], order: &[usize]) -> Result<TuckerFactors> {
    let d = x.order();
    if ranks.len() != d {
        return Err(Error::InvalidSketch(format!("{} ranks for an order-{d} tensor", ranks.len())));
    }
    let mut factors: Vec<Option<Matrix>> = vec![None; d];
    let mut core = x.clone();
    for &k in order {
        if k >= d {
            return Err(Error::ModeOutOfRange { mode: k, order: d });
        }
        let r = ranks[k];
        if r == 0 || r > x.dims()[k] {
            return Err(Error::InvalidSketch(format!("rank {r} out of range for mode {k}")));
        }
        let f = leading_left_singular_vectors(&unfold(&core, k)?, r);
        core = mode_product(&core, &f.transpose(), k)?;
        factors[k] = Some(f);
    }
    Ok(TuckerFactors {
        dims: x.dims().to_vec(),
        core: Some(core),
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn full_rank_is_exact() {
        let mut rng = SeededRng::new(1);
        let x = rng.normal_tensor(&[5, 4, 3]);
        let t = sthosvd(&x, &[5, 4, 3], &[0, 1, 2]).unwrap();
        let err = t.reconstruct().unwrap().fro_dist(&x).unwrap() / x.fro_norm();
        assert!(err <= 1e-12);
    }

    #[test]
    fn rank_one_outer_product() {
        let a = [1.0, -2.0, 0.5, 3.0];
        let b = [0.3, 1.1, -0.7];
        let c = [2.0, 1.0];
        let x = DenseTensor::from_fn(&[4, 3, 2], |i| a[i[0]] * b[i[1]] * c[i[2]]).unwrap();
        let t = sthosvd(&x, &[1, 1, 1], &[0, 1, 2]).unwrap();
        assert!(t.reconstruct().unwrap().fro_dist(&x).unwrap() / x.fro_norm() <= 1e-10);
        assert_eq!(t.ranks(), vec![1, 1, 1]);
    }

    #[test]
    fn error_within_tail_energy_bound() {
        let mut rng = SeededRng::new(2);
        let x = rng.normal_tensor(&[8, 7, 6]);
        let ranks = [3, 4, 2];
        let t = sthosvd(&x, &ranks, &[0, 1, 2]).unwrap();
        let err2 = t.reconstruct().unwrap().fro_dist(&x).unwrap().powi(2);
        let mut bound = 0.0;
        for k in 0..3 {
            let sv = unfold(&x, k).unwrap().singular_values();
            let mut s: Vec<f64> = sv.iter().copied().collect();
            s.sort_by(|a, b| b.partial_cmp(a).unwrap());
            bound += s[ranks[k]..].iter().map(|v| v * v).sum::<f64>();
        }
        assert!(err2 <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn config_validation() {
        let dims = [10, 8, 6];
        let ok = SketchConfig::fixed_rank(vec![4, 4, 2], vec![0, 1, 2], 0);
        assert!(ok.validate(&dims).is_ok());
        let bad = SketchConfig {
            mode: SketchMode::FixedRank {
                ranks: vec![4, 4, 2],
                blocks: vec![1, 1, 1],
                depths: vec![1, 1, 1],
            },
            order: vec![0, 1, 2],
            seed: 0,
        };
        assert!(bad.validate(&dims).is_err());
        assert!(SketchConfig::fixed_accuracy(1.5, 2, vec![0], 0).validate(&dims).is_err());
        assert!(SketchConfig::fixed_accuracy(0.1, 2, vec![0, 0], 0).validate(&dims).is_err());
    }
}
