//! Command-line front end for `condldp`: JSON configuration in, JSON records
//! and CSV tables out.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use condldp::empirics::Method;

pub use config::RunConfig;
pub use error::CliError;

pub const THREADS_ENV: &str = "LDP_MAX_THREADS";

#[derive(Debug, Parser)]
#[command(name = "condldp", version, about = "Conditional large deviations: tilts, rates and Monte Carlo checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; the bundled default when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured estimator.
    #[arg(long, global = true, value_parser = parse_method)]
    pub method: Option<Method>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: condldp::LdpError| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the tilt equation at x0.
    Tilt,
    /// Tabulate the conditional rate, marginal rate and free energy.
    Condition,
    /// Run every check and write a JSON report.
    Verify,
    /// Monte Carlo estimates over the configured sample sizes.
    Sweep,
}

impl Cli {
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::parse(config::DEFAULT_CONFIG)?,
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(method) = self.method {
            cfg.method = method;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Caps the global worker pool from `LDP_MAX_THREADS`.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))
}

pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let cfg = cli.resolve_config()?;
    match cli.command {
        Command::Tilt => commands::tilt(&cfg, &cli.out),
        Command::Condition => commands::condition(&cfg, &cli.out),
        Command::Verify => commands::verify(&cfg, &cli.out).map(|(s, _)| s),
        Command::Sweep => commands::sweep(&cfg, &cli.out),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let threads = std::env::var(THREADS_ENV).ok();
    let outcome = configure_threads(threads.as_deref()).and_then(|()| execute(&cli));
    match outcome {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
