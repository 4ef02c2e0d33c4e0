//! Command-line front end: single bounds, sweeps, the validation report and
//! the figure data presets.

pub mod args;
pub mod commands;
pub mod figures;
pub mod record;
pub mod validate;

use std::fmt;

use bottleneck_mimo::Error;

pub use args::Cli;

pub const THREADS_ENV: &str = "BOTTLENECK_MIMO_THREADS";

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Bound(Error),
    Io(String),
    ChecksFailed(usize),
}

impl Failure {
    pub fn io(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }

    /// 1 for failed checks, 2 for requests outside a scheme's domain,
    /// 3 for numerical or I/O failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::ChecksFailed(_) => 1,
            Failure::Bound(e) if e.is_domain() => 2,
            Failure::Bound(_) | Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Bound(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::ChecksFailed(n) => write!(f, "{n} validation check(s) failed"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Bound(e)
    }
}

/// Caps the global thread pool at `BOTTLENECK_MIMO_THREADS` when set.
pub fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer (got `{raw}`)"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        args::Command::Bound(a) => commands::cmd_bound(a),
        args::Command::Sweep(a) => commands::cmd_sweep(a),
        args::Command::Validate(a) => validate::cmd_validate(a),
        args::Command::Figures(a) => figures::cmd_figures(a),
    }
}
