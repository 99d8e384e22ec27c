use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sppl::oracle::Functional;
use sppl::samplers::Engine;

#[derive(Debug, Parser)]
#[command(
    name = "sppl",
    version,
    about = "Piecewise-smooth probabilistic programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a program to its graph JSON.
    Compile(CompileArgs),
    /// Draw posterior samples and write them with a run manifest.
    Sample(SampleArgs),
    /// Score sample files against the exact mixture posterior.
    Diagnose(DiagnoseArgs),
}

/// `name=value` binding for a model-level constant.
pub fn parse_const(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let k = k.trim();
    if !sppl::frontend::is_identifier(k) {
        return Err(format!("`{k}` is not a valid identifier"));
    }
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("`{v}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("constant `{k}` must be finite"));
    }
    Ok((k.to_string(), v))
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    pub source: PathBuf,
    /// Write the graph here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Model-level constant, repeatable.
    #[arg(long = "const", value_name = "NAME=VALUE", value_parser = parse_const)]
    pub constants: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub source: PathBuf,
    #[arg(long, default_value = "dhmc", value_parser = clap::value_parser!(Engine))]
    pub engine: Engine,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burnin: usize,
    /// Base seed. `SPPL_SEED` is used when the flag is absent.
    #[arg(long, env = "SPPL_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "step-size", default_value_t = 0.1)]
    pub step_size: f64,
    #[arg(long, default_value_t = 20)]
    pub leapfrog: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file. Defaults to `<stem>-<engine>-seed<seed>.<ext>` in the
    /// working directory; with several chains `-c<i>` is appended to the stem.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Independent chains run in parallel, one output file each.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub chains: u64,
    /// Comma-separated per-coordinate masses.
    #[arg(long, value_delimiter = ',')]
    pub mass: Vec<f64>,
    /// Draw each transition's step size from `[ε(1 - j), ε]`.
    #[arg(long = "step-jitter", default_value_t = 0.0)]
    pub step_jitter: f64,
    /// Visit discontinuous coordinates in coordinate order.
    #[arg(long = "no-permute")]
    pub no_permute: bool,
    #[arg(long = "const", value_name = "NAME=VALUE", value_parser = parse_const)]
    pub constants: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Sample files (`.csv` or `.jsonl`).
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// The program the samples were drawn from.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "max_mean", value_parser = clap::value_parser!(Functional))]
    pub functional: Functional,
    /// First sample count on the log-spaced grid.
    #[arg(long = "grid-start", default_value_t = 10)]
    pub grid_start: usize,
    #[arg(long = "grid-points", default_value_t = 50)]
    pub grid_points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "const", value_name = "NAME=VALUE", value_parser = parse_const)]
    pub constants: Vec<(String, f64)>,
}
