//! Fixed-rank randomized STHOSVD with block Krylov iteration.

use log::debug;
use nalgebra::SymmetricEigen;

use super::qr::{complete_columns, defl_qr, orthonormal_columns};
use super::tucker::{SketchConfig, SketchMode, TuckerFactors};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::tensor::{mode_product, unfold, DenseTensor, Matrix};

/// Orthonormal basis of `[AG, (AA^T)AG, ..., (AA^T)^q AG]` for one unfolding.
/// Blocks are generated from the previous orthonormal block and projected
/// off the basis built so far, which spans the same space as the raw powers
/// without losing the weak directions to roundoff.
pub(crate) fn krylov_basis(a: &Matrix, g: &Matrix, q: usize) -> Matrix {
    let n = a.nrows();
    let mut z = Matrix::zeros(n, 0);
    let mut y = a * g;
    for j in 0..=q {
        let nrm = y.norm();
        if nrm == 0.0 {
            break;
        }
        for _ in 0..2 {
            if z.ncols() > 0 {
                y -= &z * (z.transpose() * &y);
            }
        }
        let blk = orthonormal_columns(&defl_qr(&y, 1e-12 * nrm).q);
        if blk.ncols() == 0 {
            break;
        }
        let mut next = Matrix::zeros(n, z.ncols() + blk.ncols());
        next.columns_mut(0, z.ncols()).copy_from(&z);
        next.columns_mut(z.ncols(), blk.ncols()).copy_from(&blk);
        z = next;
        if j < q {
            let t = a.transpose() * &blk;
            y = a * t;
        }
    }
    z
}

/// Range finder for one mode: `F = Z U_r` with `U_r` the top eigenvectors of
/// `Z^T A A^T Z`.
pub(crate) fn bki_factor(a: &Matrix, r: usize, b: usize, q: usize, rng: &mut SeededRng, mode: usize) -> Result<Matrix> {
    let g = rng.normal_matrix(a.ncols(), b);
    let mut z = krylov_basis(a, &g, q);
    if z.ncols() < r {
        // The Krylov space may be short only because A itself has low rank.
        let resid = a - &z * (z.transpose() * a);
        if resid.norm() <= 1e-10 * a.norm().max(f64::MIN_POSITIVE) {
            debug!("mode {mode}: Krylov rank {} < {r}, completing basis", z.ncols());
            z = complete_columns(&z, r);
        } else {
            return Err(Error::KrylovRankDeficient {
                mode,
                rank: z.ncols(),
                target: r,
            });
        }
    }
    let w = a.transpose() * &z;
    let m = w.transpose() * &w;
    let eig = SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());
    let cols: Vec<_> = idx.iter().take(r).map(|&j| eig.eigenvectors.column(j).into_owned()).collect();
    let ur = Matrix::from_columns(&cols);
    Ok(&z * ur)
}

/// R-STHOSVD-BKI over `cfg.order`.
pub fn rsthosvd_bki(x: &DenseTensor, cfg: &SketchConfig) -> Result<TuckerFactors> {
    cfg.validate(x.dims())?;
    let SketchMode::FixedRank { ranks, blocks, depths } = &cfg.mode else {
        return Err(Error::InvalidSketch("block Krylov iteration needs a fixed-rank configuration".into()));
    };
    let mut rng = SeededRng::new(cfg.seed);
    let mut factors: Vec<Option<Matrix>> = vec![None; x.order()];
    let mut core = x.clone();
    for &k in &cfg.order {
        let a = unfold(&core, k)?;
        let mut mode_rng = rng.fork();
        let f = bki_factor(&a, ranks[k], blocks[k], depths[k], &mut mode_rng, k)?;
        core = mode_product(&core, &f.transpose(), k)?;
        factors[k] = Some(f);
    }
    Ok(TuckerFactors {
        dims: x.dims().to_vec(),
        core: Some(core),
        factors,
    })
}
