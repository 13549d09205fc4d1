use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use tenrec_core::{read_tensor, synth_lowrank_smooth, write_tensor, DenseTensor, SeededRng};

/// Ground-truth source: a GTEN file or the synthetic generator.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Read the ground truth from a GTEN file.
    #[arg(long, conflicts_with_all = ["dims", "true_rank"])]
    pub input: Option<PathBuf>,
    /// Synthetic tensor dimensions, e.g. 60,60,10.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Multilinear rank of the synthetic tensor (defaults to a quarter of each dimension).
    #[arg(long, value_delimiter = ',')]
    pub true_rank: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.8)]
    pub smoothness: f64,
    #[arg(long, default_value_t = 1)]
    pub data_seed: u64,
    /// Standard deviation of additive Gaussian noise on the synthetic tensor.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

impl DataArgs {
    pub fn load(&self) -> Result<DenseTensor> {
        if let Some(p) = &self.input {
            return read_tensor(p).with_context(|| format!("reading {}", p.display()));
        }
        let Some(dims) = &self.dims else {
            bail!("either --input or --dims is required");
        };
        let rank = match &self.true_rank {
            Some(r) => r.clone(),
            None => dims.iter().map(|&n| n.div_ceil(4)).collect(),
        };
        let mut x = synth_lowrank_smooth(dims, &rank, self.smoothness, self.data_seed)?;
        if self.noise > 0.0 {
            let mut rng = SeededRng::new(self.data_seed ^ 0x9e37_79b9_7f4a_7c15);
            x = x.add(&rng.normal_tensor(dims).scale(self.noise))?;
        }
        Ok(x)
    }
}

pub fn save(path: &Option<PathBuf>, x: &DenseTensor) -> Result<()> {
    if let Some(p) = path {
        write_tensor(p, x).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

pub fn save_csv(path: &Option<PathBuf>, body: &str) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}
