use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use tenrec_core::data::{corrupt, psnr, read_tensor};
use tenrec_core::recovery::{gnhtc, gnobhtc, gnobrhtc, gnrhtc, onebit_observe, Regularizer, SolverConfig};
use tenrec_core::sketch::{ad_rsthosvd_blbp, gnhtsvt_randomized, rsthosvd_bki, sthosvd, SketchConfig, SketchMode};
use tenrec_core::{gnhtsvt, metrics as compute_metrics, synth_lowrank_smooth, Penalty, ShrinkStructure, Transform, TransformKind};

use crate::data::{save, save_csv, DataArgs};
use crate::record::Record;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Sthosvd,
    Bki,
    Blbp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    Fft,
    Dct,
}

impl From<TransformArg> for TransformKind {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::Fft => TransformKind::Fft,
            TransformArg::Dct => TransformKind::Dct,
        }
    }
}

/// Expands a one-entry list to `d` entries.
fn per_mode(values: &[usize], d: usize, what: &str) -> Result<Vec<usize>> {
    match values.len() {
        1 => Ok(vec![values[0]; d]),
        n if n == d => Ok(values.to_vec()),
        n => bail!("--{what} needs 1 or {d} entries, got {n}"),
    }
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.context("--seed is required for randomized runs")
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub rank: Vec<usize>,
    #[arg(long, default_value_t = 0.8)]
    pub smoothness: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn synth(a: SynthArgs) -> Result<Record> {
    let x = synth_lowrank_smooth(&a.dims, &a.rank, a.smoothness, a.seed)?;
    save(&Some(a.out.clone()), &x)?;
    let mut r = Record::new("synth");
    r.push_list("dims", &a.dims)
        .push_list("rank", &a.rank)
        .push("smoothness", a.smoothness)
        .push("seed", a.seed)
        .push("fro_norm", x.fro_norm())
        .push("out", a.out.display());
    Ok(r)
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = Algo::Bki)]
    pub algo: Algo,
    /// Target multilinear rank (one value or one per mode).
    #[arg(long, value_delimiter = ',', conflicts_with = "eps")]
    pub rank: Option<Vec<usize>>,
    /// Relative tolerance of the adaptive Lanczos sketch.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Block size (one value or one per mode); defaults to ceil(r/4), or 4 with --eps.
    #[arg(long, value_delimiter = ',')]
    pub block: Option<Vec<usize>>,
    /// Krylov depth (one value or one per mode).
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub krylov: Vec<usize>,
    /// Processing order of the compressed modes (0-based).
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-mode diagnostics as CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the reconstruction as GTEN.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn approx(a: ApproxArgs) -> Result<Record> {
    let x = a.data.load()?;
    let d = x.order();
    let order = a.order.clone().unwrap_or_else(|| (0..d).collect());
    let mut r = Record::new("approx");
    let mut report = String::new();
    let start = Instant::now();
    let t = match a.algo {
        Algo::Sthosvd | Algo::Bki => {
            let ranks = per_mode(a.rank.as_deref().context("--rank is required for this algorithm")?, d, "rank")?;
            let ranks: Vec<usize> = ranks.iter().zip(x.dims()).map(|(&r, &n)| r.min(n)).collect();
            if a.algo == Algo::Sthosvd {
                sthosvd(&x, &ranks, &order)?
            } else {
                let blocks = match &a.block {
                    Some(b) => per_mode(b, d, "block")?,
                    None => ranks.iter().map(|&r| r.div_ceil(4).max(1)).collect(),
                };
                let cfg = SketchConfig {
                    mode: SketchMode::FixedRank {
                        ranks: ranks.clone(),
                        blocks,
                        depths: per_mode(&a.krylov, d, "krylov")?,
                    },
                    order: order.clone(),
                    seed: require_seed(a.seed)?,
                };
                rsthosvd_bki(&x, &cfg)?
            }
        }
        Algo::Blbp => {
            let eps = a.eps.context("--eps is required for blbp")?;
            let block = match a.block.as_deref() {
                None => 4,
                Some([b]) => *b,
                Some(_) => bail!("blbp takes a single --block value"),
            };
            let cfg = SketchConfig::fixed_accuracy(eps, block, order.clone(), require_seed(a.seed)?);
            let (t, diag) = ad_rsthosvd_blbp(&x, &cfg)?;
            report.push_str("mode,rank,energy,input_energy,iterations,deflations,orthogonality_loss\n");
            for m in &diag.modes {
                report.push_str(&format!(
                    "{},{},{:e},{:e},{},{},{:e}\n",
                    m.mode,
                    m.block_widths.iter().sum::<usize>(),
                    m.energy,
                    m.input_energy,
                    m.iterations,
                    m.deflations,
                    m.orthogonality_loss
                ));
            }
            r.push("estimated_rel_error", diag.total_energy().max(0.0).sqrt() / x.fro_norm());
            t
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let xh = t.reconstruct()?;
    if report.is_empty() {
        report.push_str("mode,rank\n");
        for (k, rk) in t.ranks().iter().enumerate() {
            report.push_str(&format!("{k},{rk}\n"));
        }
    }
    save_csv(&a.report, &report)?;
    save(&a.out, &xh)?;
    let nrm = x.fro_norm();
    r.push("algo", format!("{:?}", a.algo).to_lowercase())
        .push_list("dims", x.dims())
        .push_list("ranks", &t.ranks())
        .push("rel_error", if nrm > 0.0 { x.fro_dist(&xh)? / nrm } else { 0.0 })
        .push("seconds", seconds);
    Ok(r)
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Penalty on transform-domain singular values: l1, firm:G, lq:Q, cappedlq:Q:C, mcp:G, scad:A, log:G.
    #[arg(long, default_value = "mcp:6")]
    pub penalty: Penalty,
    /// Gradient modes (0-based); defaults to all modes.
    #[arg(long, value_delimiter = ',', conflicts_with = "low_rank")]
    pub gamma_modes: Option<Vec<usize>>,
    /// Penalize L directly instead of its gradients.
    #[arg(long)]
    pub low_rank: bool,
    #[arg(long)]
    pub xi: Option<f64>,
    /// Explicit noise weight (overrides --xi).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = TransformArg::Fft)]
    pub transform: TransformArg,
    /// Replace every thresholding step by its sketched version.
    #[arg(long)]
    pub randomized: bool,
    /// Sketch ranks of modes 0 and 1 for --randomized.
    #[arg(long, value_delimiter = ',')]
    pub sketch_rank: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-iteration residual history as CSV.
    #[arg(long)]
    pub residuals: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SolverArgs {
    fn apply(&self, cfg: &mut SolverConfig, dims: &[usize]) -> Result<()> {
        cfg.regularizer = if self.low_rank {
            Regularizer::LowRank
        } else {
            match &self.gamma_modes {
                Some(m) => Regularizer::Gradient(m.clone()),
                None => Regularizer::GradientAll,
            }
        };
        if let Some(xi) = self.xi {
            cfg.xi = xi;
        }
        cfg.lambda = self.lambda;
        cfg.max_iters = self.max_iters;
        cfg.tol = self.tol;
        cfg.transform = self.transform.into();
        if self.randomized {
            ensure!(dims.len() >= 3, "--randomized needs an order >= 3 tensor");
            let mut ranks = dims.to_vec();
            let sr = match &self.sketch_rank {
                Some(v) if v.len() == 2 => v.clone(),
                Some(v) if v.len() == 1 => vec![v[0]; 2],
                Some(_) => bail!("--sketch-rank takes one or two values"),
                None => vec![dims[0].div_ceil(4), dims[1].div_ceil(4)],
            };
            ranks[0] = sr[0].min(dims[0]);
            ranks[1] = sr[1].min(dims[1]);
            cfg.sketch = Some(SketchConfig::fixed_rank(ranks, vec![0, 1], require_seed(self.seed)?));
        }
        cfg.validate()?;
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Sampling rate.
    #[arg(long, default_value_t = 0.5)]
    pub sr: f64,
    /// Impulse-noise ratio.
    #[arg(long, default_value_t = 0.0)]
    pub nr: f64,
    /// Penalty on the noise component.
    #[arg(long, default_value = "mcp:6")]
    pub noise_penalty: Penalty,
    #[arg(long, default_value = "entry")]
    pub structure: ShrinkStructure,
    /// Trust observed entries (no noise component).
    #[arg(long)]
    pub noise_free: bool,
}

pub fn complete(a: CompleteArgs) -> Result<Record> {
    let x = a.data.load()?;
    let seed = require_seed(a.solver.seed)?;
    let c = corrupt(&x, a.sr, a.nr, seed)?;
    let mut cfg = SolverConfig::new(a.solver.penalty, a.noise_penalty);
    cfg.structure = a.structure;
    a.solver.apply(&mut cfg, x.dims())?;
    let (l, rep) = if a.noise_free {
        gnhtc(&c.observed, &c.mask, &cfg)?
    } else {
        let (l, _, rep) = gnrhtc(&c.observed, &c.mask, &cfg)?;
        (l, rep)
    };
    save_csv(&a.solver.residuals, &rep.history_csv())?;
    save(&a.solver.out, &l)?;
    let m = compute_metrics(&x, &l)?;
    let mut r = Record::new("complete");
    r.push("solver", if a.noise_free { "gnhtc" } else { "gnrhtc" })
        .push_list("dims", x.dims())
        .push("sr", a.sr)
        .push("nr", a.nr)
        .push("penalty", a.solver.penalty)
        .push("noise_penalty", a.noise_penalty)
        .push("structure", a.structure)
        .push("randomized", a.solver.randomized)
        .push("status", rep.status)
        .push("iterations", rep.iterations)
        .push("lambda", rep.lambda)
        .push("final_mu", rep.final_mu)
        .push("max_residual", rep.last().map_or(0.0, |h| h.max_inf()))
        .push("psnr", m.psnr)
        .push("band_mean_psnr", m.band_mean_psnr)
        .push("rse", m.rse)
        .push("seconds", rep.wall_clock.as_secs_f64());
    Ok(r)
}

#[derive(Debug, Args)]
pub struct OnebitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Number of one-bit samples; defaults to round(sr * N).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub sr: f64,
    /// Dither level; defaults to 1.2 * (||L||_inf + 3 sigma).
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    /// Box bound on the estimate; defaults to theta.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Also separate a sparse component.
    #[arg(long)]
    pub robust: bool,
    /// Impulse-noise ratio of the sparse corruption added before quantization.
    #[arg(long, default_value_t = 0.0)]
    pub nr: f64,
    #[arg(long, default_value = "l1")]
    pub sparse_penalty: Penalty,
    #[arg(long, default_value_t = 1.0)]
    pub lambda2: f64,
}

pub fn onebit(a: OnebitArgs) -> Result<Record> {
    let x = a.data.load()?;
    let seed = require_seed(a.solver.seed)?;
    let m = a.m.unwrap_or_else(|| ((a.sr * x.len() as f64).round() as usize).max(1));
    let sparse = if a.nr > 0.0 {
        Some(corrupt(&x, 1.0, a.nr, seed ^ 0x5bd1_e995)?.noise)
    } else {
        None
    };
    let theta = a.theta.unwrap_or(1.2 * (x.max_abs() + 3.0 * a.sigma));
    let alpha = a.alpha.unwrap_or(theta);
    let obs = onebit_observe(&x, m, theta, a.sigma, seed, sparse.as_ref())?;
    let mut cfg = SolverConfig::onebit(a.solver.penalty, a.sparse_penalty);
    cfg.lambda2 = a.lambda2;
    a.solver.apply(&mut cfg, x.dims())?;
    let (l, rep) = if a.robust {
        let (l, _, rep) = gnobrhtc(&obs, &cfg, alpha)?;
        (l, rep)
    } else {
        gnobhtc(&obs, &cfg, alpha)?
    };
    save_csv(&a.solver.residuals, &rep.history_csv())?;
    save(&a.solver.out, &l)?;
    let met = compute_metrics(&x, &l)?;
    let mut r = Record::new("onebit");
    r.push("solver", if a.robust { "gnobrhtc" } else { "gnobhtc" })
        .push_list("dims", x.dims())
        .push("m", m)
        .push("theta", theta)
        .push("sigma", a.sigma)
        .push("alpha", alpha)
        .push("status", rep.status)
        .push("iterations", rep.iterations)
        .push("lambda", rep.lambda)
        .push("psnr", met.psnr)
        .push("band_mean_psnr", met.band_mean_psnr)
        .push("rse", met.rse)
        .push("naive_psnr", psnr(&x, &obs.naive_estimate())?)
        .push("seconds", rep.wall_clock.as_secs_f64());
    Ok(r)
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub estimate: PathBuf,
}

pub fn metrics(a: MetricsArgs) -> Result<Record> {
    let x = read_tensor(&a.reference).with_context(|| format!("reading {}", a.reference.display()))?;
    let y = read_tensor(&a.estimate).with_context(|| format!("reading {}", a.estimate.display()))?;
    let m = compute_metrics(&x, &y)?;
    let mut r = Record::new("metrics");
    r.push("psnr", m.psnr).push("band_mean_psnr", m.band_mean_psnr).push("rse", m.rse);
    Ok(r)
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Sketch ranks of modes 0 and 1.
    #[arg(long, value_delimiter = ',', default_value = "40,40")]
    pub rank: Vec<usize>,
    #[arg(long, default_value = "mcp:6")]
    pub penalty: Penalty,
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long)]
    pub seed: u64,
}

pub fn bench(a: BenchArgs) -> Result<Record> {
    let x = a.data.load()?;
    ensure!(x.order() >= 3, "bench needs an order >= 3 tensor");
    ensure!(a.rank.len() == 2, "--rank takes two values");
    ensure!(a.repeats >= 1, "--repeats must be at least 1");
    let l = Transform::for_dims(TransformKind::Fft, x.dims())?;
    let mut ranks = x.dims().to_vec();
    ranks[0] = a.rank[0].min(ranks[0]);
    ranks[1] = a.rank[1].min(ranks[1]);
    let cfg = SketchConfig::fixed_rank(ranks, vec![0, 1], a.seed);
    let mut det_s = f64::INFINITY;
    let mut ran_s = f64::INFINITY;
    let mut det = None;
    let mut ran = None;
    for _ in 0..a.repeats {
        let t = Instant::now();
        det = Some(gnhtsvt(&x, &l, &a.penalty, a.tau)?);
        det_s = det_s.min(t.elapsed().as_secs_f64());
        let t = Instant::now();
        ran = Some(gnhtsvt_randomized(&x, &l, &a.penalty, a.tau, &cfg)?);
        ran_s = ran_s.min(t.elapsed().as_secs_f64());
    }
    let (det, ran) = (det.unwrap(), ran.unwrap());
    let nrm = det.fro_norm();
    let mut r = Record::new("bench");
    r.push_list("dims", x.dims())
        .push_list("sketch_rank", &a.rank)
        .push("deterministic_seconds", det_s)
        .push("randomized_seconds", ran_s)
        .push("speedup", det_s / ran_s)
        .push("rel_deviation", if nrm > 0.0 { ran.fro_dist(&det)? / nrm } else { 0.0 });
    Ok(r)
}
