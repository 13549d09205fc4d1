use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::tensor::DenseTensor;

/// Observed index set over a tensor's linear (column-major) indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    dims: Vec<usize>,
    flags: Vec<bool>,
    indices: Vec<usize>,
}

impl Mask {
    pub fn from_indices(dims: &[usize], indices: &[usize]) -> Result<Self> {
        let n: usize = dims.iter().product();
        let mut flags = vec![false; n];
        for &i in indices {
            if i >= n {
                return Err(Error::InvalidParameter(format!("mask index {i} out of range {n}")));
            }
            flags[i] = true;
        }
        Ok(Self::from_flags_unchecked(dims, flags))
    }

    pub fn from_flags(dims: &[usize], flags: Vec<bool>) -> Result<Self> {
        if flags.len() != dims.iter().product::<usize>() {
            return Err(Error::ShapeMismatch(format!("{} flags for dims {dims:?}", flags.len())));
        }
        Ok(Self::from_flags_unchecked(dims, flags))
    }

    fn from_flags_unchecked(dims: &[usize], flags: Vec<bool>) -> Self {
        let indices = flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect();
        Self {
            dims: dims.to_vec(),
            flags,
            indices,
        }
    }

    pub fn full(dims: &[usize]) -> Self {
        Self::from_flags_unchecked(dims, vec![true; dims.iter().product()])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Sorted observed linear indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.flags[i]
    }

    /// `P_Omega(x)`: keeps observed entries, zeroes the rest.
    pub fn project(&self, x: &DenseTensor) -> DenseTensor {
        let data = x
            .data()
            .iter()
            .zip(&self.flags)
            .map(|(&v, &f)| if f { v } else { 0.0 })
            .collect();
        DenseTensor::new(x.dims().to_vec(), data).expect("same dims")
    }
}

/// Output of [`corrupt`].
#[derive(Debug, Clone)]
pub struct Corruption {
    /// Noisy tensor restricted to the observed set (zero elsewhere).
    pub observed: DenseTensor,
    pub mask: Mask,
    /// `noisy - clean` over the whole tensor.
    pub noise: DenseTensor,
    /// Linear indices whose value was replaced.
    pub corrupted: Vec<usize>,
}

/// Replaces `round(nr * N)` entries with `U[0, 1]` draws, then samples
/// `round(sr * N)` indices without replacement as the observed set.
pub fn corrupt(x: &DenseTensor, sr: f64, nr: f64, seed: u64) -> Result<Corruption> {
    if !(sr > 0.0 && sr <= 1.0) {
        return Err(Error::InvalidParameter(format!("SR must lie in (0, 1], got {sr}")));
    }
    if !(0.0..1.0).contains(&nr) {
        return Err(Error::InvalidParameter(format!("NR must lie in [0, 1), got {nr}")));
    }
    let n = x.len();
    let n_obs = (sr * n as f64).round() as usize;
    if n_obs == 0 {
        return Err(Error::InvalidParameter(format!("SR = {sr} observes no entries of {n}")));
    }
    let n_bad = (nr * n as f64).round() as usize;
    let mut rng = SeededRng::new(seed);
    let corrupted = rng.sample_without_replacement(n, n_bad);
    let mut noisy = x.data().to_vec();
    for &i in &corrupted {
        noisy[i] = rng.uniform();
    }
    let mask = Mask::from_indices(x.dims(), &rng.sample_without_replacement(n, n_obs))?;
    let noisy = DenseTensor::new(x.dims().to_vec(), noisy)?;
    let noise = noisy.sub(x)?;
    Ok(Corruption {
        observed: mask.project(&noisy),
        mask,
        noise,
        corrupted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_are_exact() {
        let mut rng = SeededRng::new(1);
        let x = rng.uniform_tensor(&[10, 9, 7]);
        let c = corrupt(&x, 0.37, 0.21, 5).unwrap();
        let n = x.len() as f64;
        assert_eq!(c.mask.len(), (0.37 * n).round() as usize);
        assert_eq!(c.corrupted.len(), (0.21 * n).round() as usize);
        let mut uniq = c.corrupted.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), c.corrupted.len());
        let again = corrupt(&x, 0.37, 0.21, 5).unwrap();
        assert_eq!(again.observed.data(), c.observed.data());
    }

    #[test]
    fn clean_and_full_cases() {
        let mut rng = SeededRng::new(2);
        let x = rng.uniform_tensor(&[6, 5, 4]);
        let c = corrupt(&x, 0.5, 0.0, 1).unwrap();
        for &i in c.mask.indices() {
            assert_eq!(c.observed.data()[i], x.data()[i]);
        }
        assert_eq!(c.noise.max_abs(), 0.0);
        let full = corrupt(&x, 1.0, 0.0, 1).unwrap();
        assert_eq!(full.mask.len(), x.len());
        assert!(corrupt(&x, 0.0, 0.0, 1).is_err());
        assert!(corrupt(&x, 0.5, 1.0, 1).is_err());
    }
}
