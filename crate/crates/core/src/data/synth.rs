use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::sketch::TuckerFactors;
use crate::tensor::{DenseTensor, Matrix};

fn cosine(n: usize, j: usize) -> Vec<f64> {
    (0..n)
        .map(|t| (std::f64::consts::PI * (t as f64 + 0.5) * j as f64 / n as f64).cos())
        .collect()
}

fn unit(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Orthonormal `n x r` factor whose span contains the constant vector; the
/// other columns blend Gaussian noise with low-frequency cosines.
fn smooth_factor(n: usize, r: usize, s: f64, rng: &mut SeededRng) -> Matrix {
    let mut cols = Matrix::zeros(n, r);
    cols.column_mut(0).fill(1.0);
    for j in 1..r {
        let mut g: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mut c = cosine(n, j);
        unit(&mut g);
        unit(&mut c);
        for t in 0..n {
            cols[(t, j)] = (1.0 - s) * g[t] + s * c[t];
        }
    }
    let q = cols.qr().q();
    q.columns(0, r).into_owned()
}

/// Nonnegative rank-1 profile with minimum exactly 0.
fn smooth_profile(n: usize, s: f64, rng: &mut SeededRng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|t| {
            let c = if n > 1 {
                1.0 + (std::f64::consts::PI * t as f64 / (n - 1) as f64).cos()
            } else {
                1.0
            };
            (1.0 - s) * rng.normal().abs() + s * c
        })
        .collect();
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    v.iter_mut().for_each(|x| *x -= lo);
    if v.iter().all(|&x| x == 0.0) {
        v.iter_mut().for_each(|x| *x = 1.0);
    }
    v
}

/// Low multilinear-rank tensor with smooth factors, affinely mapped onto
/// `[0, 1]`. `smoothness = 1` uses pure cosine columns, `0` pure Gaussian.
pub fn synth_lowrank_smooth(dims: &[usize], rank: &[usize], smoothness: f64, seed: u64) -> Result<DenseTensor> {
    if dims.is_empty() || dims.len() != rank.len() {
        return Err(Error::InvalidDims(format!("dims {dims:?} and rank {rank:?} disagree")));
    }
    if rank.iter().zip(dims).any(|(&r, &n)| r == 0 || r > n) {
        return Err(Error::InvalidParameter(format!("rank {rank:?} out of range for {dims:?}")));
    }
    if !(0.0..=1.0).contains(&smoothness) {
        return Err(Error::InvalidParameter(format!("smoothness must lie in [0, 1], got {smoothness}")));
    }
    let mut rng = SeededRng::new(seed);
    if rank.iter().all(|&r| r == 1) {
        let profiles: Vec<Vec<f64>> = dims.iter().map(|&n| smooth_profile(n, smoothness, &mut rng)).collect();
        let x = DenseTensor::from_fn(dims, |idx| idx.iter().enumerate().map(|(k, &i)| profiles[k][i]).product())?;
        let hi = x.max_abs();
        if hi == 0.0 {
            return DenseTensor::zeros(dims);
        }
        return Ok(x.scale(1.0 / hi));
    }
    // Energy decays with the cosine index so smooth columns dominate.
    let core = rng
        .normal_tensor(rank)
        .zip_map(
            &DenseTensor::from_fn(rank, |idx| {
                idx.iter().map(|&j| (1.0 + j as f64).powf(-2.0 * smoothness)).product()
            })?,
            |g, w| g * w,
        )?;
    let factors = dims
        .iter()
        .zip(rank)
        .map(|(&n, &r)| Some(smooth_factor(n, r, smoothness, &mut rng)))
        .collect();
    let x = TuckerFactors {
        dims: dims.to_vec(),
        core: Some(core),
        factors,
    }
    .reconstruct()?;
    let lo = x.data().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return DenseTensor::zeros(dims);
    }
    Ok(x.map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0)))
}
