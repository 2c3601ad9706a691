use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Bayesian structure learning of block-structured Gaussian graphical models.
#[derive(Debug, Parser)]
#[command(name = "blockgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for replicated runs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// CSV inputs have, and CSV data outputs get, a header row.
    #[arg(long, global = true)]
    header: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate block-structured datasets, optionally sampling and scoring each.
    Simulate,
    /// Run the block double reversible jump sampler on a data matrix.
    Sample {
        /// Data CSV (`n x p`); overrides the configuration.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Posterior summaries of a sample file.
    Summarize {
        #[arg(long)]
        samples: PathBuf,
        /// BFDR target.
        #[arg(long, default_value_t = 0.05)]
        target: f64,
    },
    /// Compare an estimated graph with the true graph.
    Metrics {
        #[arg(long)]
        estimate: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Smooth curves with B-splines and a block graph on the coefficients.
    Smooth {
        /// Curves CSV, one curve per row; overrides the configuration.
        #[arg(long)]
        curves: Option<PathBuf>,
        /// Grid CSV; overrides the configuration.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Exact posterior over all block graphs of a small, decomposable instance.
    Oracle {
        /// Data CSV; overrides the configuration.
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BLOCKGRAPH_LOG", "warn"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.command, cli.common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
