//! Seeded randomness. Every random draw in the crate goes through
//! [`SeededRng`]: a ChaCha8 stream seeded from a single `u64`, with normal
//! variates from `rand_distr::StandardNormal` (ziggurat method).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::{DenseTensor, Matrix};

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent child stream, e.g. one per mode or per trial.
    pub fn fork(&mut self) -> Self {
        Self::new(self.inner.random())
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// `amount` distinct indices from `0..n`, in draw order.
    pub fn sample_without_replacement(&mut self, n: usize, amount: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.inner, n, amount).into_vec()
    }

    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| self.normal())
    }

    pub fn normal_tensor(&mut self, dims: &[usize]) -> DenseTensor {
        let n = dims.iter().product();
        let data = (0..n).map(|_| self.normal()).collect();
        DenseTensor::new(dims.to_vec(), data).expect("valid dims")
    }

    pub fn uniform_tensor(&mut self, dims: &[usize]) -> DenseTensor {
        let n = dims.iter().product();
        let data = (0..n).map(|_| self.uniform()).collect();
        DenseTensor::new(dims.to_vec(), data).expect("valid dims")
    }
}
