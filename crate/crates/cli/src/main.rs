mod commands;
mod data;
mod record;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "tenrec", version, about = "Tensor approximation and recovery experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic low-rank smooth tensor.
    Synth(commands::SynthArgs),
    /// Tucker approximation (STHOSVD, block Krylov, or adaptive Lanczos).
    Approx(commands::ApproxArgs),
    /// Robust or noise-free completion from sampled, corrupted entries.
    Complete(commands::CompleteArgs),
    /// Completion from dithered one-bit samples.
    Onebit(commands::OnebitArgs),
    /// PSNR, band-mean PSNR and RSE between two tensors.
    Metrics(commands::MetricsArgs),
    /// Wall-clock comparison of deterministic and sketched thresholding.
    Bench(commands::BenchArgs),
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let record = match cli.command {
        Command::Synth(a) => commands::synth(a)?,
        Command::Approx(a) => commands::approx(a)?,
        Command::Complete(a) => commands::complete(a)?,
        Command::Onebit(a) => commands::onebit(a)?,
        Command::Metrics(a) => commands::metrics(a)?,
        Command::Bench(a) => commands::bench(a)?,
    };
    record.write_to(std::io::stdout().lock())?;
    Ok(())
}
