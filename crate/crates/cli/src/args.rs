use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bottleneck-mimo", version, about = "Information-bottleneck rate bounds for Rayleigh-fading MIMO relays")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one bound at one parameter point.
    Bound(BoundArgs),
    /// Evaluate bounds along one parameter axis.
    Sweep(SweepArgs),
    /// Run the internal consistency checks and report pass/fail as JSON.
    Validate(ValidateArgs),
    /// Write the data behind every preset figure as CSV files.
    Figures(FiguresArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    C,
    RhoDb,
    M,
    KEqualsM,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Transmit antennas.
    #[arg(long)]
    pub k: usize,
    /// Relay antennas.
    #[arg(long)]
    pub m: usize,
    /// SNR in dB.
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db: f64,
    /// Bottleneck capacity, bits per complex dimension.
    #[arg(long)]
    pub c: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SchemeOptions {
    /// Quantization bits B for qci (default 2).
    #[arg(long)]
    pub bits: Option<u32>,
    /// Truncation threshold for tci; omitted means the default threshold policy.
    #[arg(long)]
    pub lambda_th: Option<f64>,
    /// Fixed distortion for ndt; omitted means optimized.
    #[arg(long)]
    pub distortion: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Monte Carlo channel draws.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    /// One of ub, ndt, qci, tci, mmse, capacity.
    #[arg(long)]
    pub scheme: String,
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub options: SchemeOptions,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Axis values: a comma list (`0,5,10`) or `start:step:stop`.
    #[arg(long, allow_hyphen_values = true)]
    pub values: String,
    /// Comma list of schemes; `qci:B` sets the bits per entry.
    #[arg(long, default_value = "ub,ndt,qci,tci,mmse")]
    pub scheme: String,
    #[command(flatten)]
    pub point: PointArgs,
    /// With `--axis k-equals-m`, set C = c_per_k * K on every row.
    #[arg(long)]
    pub c_per_k: Option<f64>,
    #[command(flatten)]
    pub options: SchemeOptions,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Use 10^4 Monte Carlo samples instead of 10^5.
    #[arg(long)]
    pub quick: bool,
    /// Tolerance for the quadrature checks.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FiguresArgs {
    #[arg(long)]
    pub output_dir: PathBuf,
    #[command(flatten)]
    pub mc: McArgs,
}
