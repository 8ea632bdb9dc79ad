//! `qread`: derive, evaluate and optimize single-photon dispersive readout.
//!
//! Exit codes: 0 success, 2 configuration or argument error, 3 regime
//! violation under `--strict`, 4 solver failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod fail;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fail::Failure;

#[derive(Parser, Debug)]
#[command(name = "qread", version, about = "Single-photon qubit readout: contrast, design and optimization")]
struct Cli {
    /// Worker threads for maps, sweeps and grid checks (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print derived couplings and regime diagnostics.
    Derive {
        #[command(flatten)]
        common: Common,
    },
    /// Readout contrast from the closed-form dispersive model or the full solver.
    Contrast {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Model::Full)]
        model: Model,
        #[command(flatten)]
        grid: GridFlags,
    },
    /// Recompute the bundled reference tables and compare.
    Tables {
        /// Table id: I (millisecond windows) or II (microsecond windows).
        #[arg(long)]
        which: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contrast map over (g, κ) with the carrier on ω_r + χ at every cell.
    Map {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ranges: MapRanges,
        #[arg(long, value_enum, default_value_t = Model::Full)]
        model: Model,
        /// Also write a gnuplot script for the CSV.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
    /// Maximize the contrast over (g, κ).
    Optimize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchFlags,
        /// Write every evaluated point to this CSV.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Maximal contrast along a pulse-duration or detuning sweep.
    Curve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        search: SearchFlags,
        #[arg(long, value_enum)]
        sweep: SweepKind,
        /// Comma-separated sweep values: t_m in μs, or detuning (ω_q − ω_r)/2π in GHz.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// λ/Λ kept fixed along a detuning sweep.
        #[arg(long, default_value_t = 10.0)]
        ratio: f64,
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// CSV output path (default: the config's `out`, else none or stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail with exit code 3 when a regime threshold is violated.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct GridFlags {
    /// Run the k-grid convergence check with this span factor.
    #[arg(long)]
    grid_span: Option<f64>,
    /// Run the k-grid convergence check with this many nodes per cluster.
    #[arg(long)]
    grid_nodes: Option<usize>,
    /// Convergence threshold on successive C_n changes (fraction, 5e-4 = 0.05 pp).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 3)]
    grid_levels: usize,
}

#[derive(Args, Debug)]
struct MapRanges {
    /// g/2π range in MHz as lo:hi:points.
    #[arg(long)]
    g_mhz: String,
    /// κ/2π range in MHz as lo:hi:points.
    #[arg(long)]
    kappa_mhz: String,
}

#[derive(Args, Debug)]
struct SearchFlags {
    /// g/2π bounds in MHz as lo:hi.
    #[arg(long)]
    g_mhz: String,
    /// κ/2π bounds in MHz as lo:hi.
    #[arg(long)]
    kappa_mhz: String,
    #[arg(long, value_enum, default_value_t = Model::Full)]
    model: Model,
    /// Side of the coarse log grid that seeds the direct search.
    #[arg(long, default_value_t = 12)]
    coarse: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Model {
    Dispersive,
    Full,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SweepKind {
    PulseDuration,
    Detuning,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Failure::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot size the worker pool: {e}")))?;
    }
    match cli.command {
        Command::Derive { common } => commands::derive(&common),
        Command::Contrast { common, model, grid } => commands::contrast(&common, model, &grid),
        Command::Tables { which, out } => commands::tables(&which, out.as_deref()),
        Command::Map { common, ranges, model, gnuplot } => commands::map(&common, &ranges, model, gnuplot.as_deref()),
        Command::Optimize { common, search, samples } => commands::optimize(&common, &search, samples.as_deref()),
        Command::Curve { common, search, sweep, values, ratio, gnuplot } => {
            commands::curve(&common, &search, sweep, &values, ratio, gnuplot.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
