//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for invalid input or usage, 1 for internal
//! failures.

pub mod commands;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::decompose::{DecomposeError, LimitOptions};
use crate::exact::{parse_ratio, Ratio};
use crate::problem::{Problem, ProblemError};
use crate::scaling::ScalingError;

pub use commands::{cmd_bench, cmd_check, cmd_decompose, cmd_limits, cmd_scale};
pub use input::{parse_problem_text, ProblemDocument};
pub use report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("invalid problem: {0}")]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Decompose(Box<DecomposeError>),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
}

impl From<DecomposeError> for CliError {
    fn from(e: DecomposeError) -> Self {
        CliError::Decompose(Box::new(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Problem(_) | CliError::Usage(_) => 2,
            CliError::Decompose(_) | CliError::Scaling(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "isp-limits", version, about = "Iterative scaling with exact limit-point decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem file (JSON or bordered CSV); reads standard input when omitted or `-`.
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Significant digits for matrix values (text output defaults to 6; JSON keeps full precision unless set).
    #[arg(long)]
    pub precision: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hall feasibility test at scale t.
    Check {
        #[command(flatten)]
        common: Common,
        /// Scale factor t as a decimal or fraction; defaults to Σr/Σc.
        #[arg(long, value_parser = parse_scale)]
        scale: Option<Ratio>,
    },
    /// Block decomposition of the limit with exact quotients.
    Decompose {
        #[command(flatten)]
        common: Common,
    },
    /// Both limit matrices via decomposition and per-block scaling.
    Limits {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Per-block iteration cap.
        #[arg(long, default_value_t = 1_000_000)]
        iters: usize,
    },
    /// Naive alternating scaling for a fixed number of rounds.
    Scale {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        /// Stop early once the sup-norm change of B is at most this.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        /// Write a per-round CSV trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Rounds to tolerance: naive scaling against the decomposition path.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Cap on naive rounds.
        #[arg(long, default_value_t = 100_000)]
        iters: usize,
        /// Write a CSV of column deviation per round for both paths here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

fn parse_scale(s: &str) -> Result<Ratio, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

pub fn read_problem(input: Option<&PathBuf>) -> Result<Problem, CliError> {
    let text = match input {
        Some(path) if path.as_os_str() != "-" => {
            std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?
        }
        _ => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).map_err(|e| CliError::Io { path: "<stdin>".into(), source: e })?;
            buf
        }
    };
    parse_problem_text(&text)
}

/// Runs a parsed command and renders its output.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let (common, report) = match &cli.command {
        Command::Check { common, scale } => {
            let p = read_problem(common.input.as_ref())?;
            (common, cmd_check(&p, scale.as_ref())?)
        }
        Command::Decompose { common } => {
            let p = read_problem(common.input.as_ref())?;
            (common, cmd_decompose(&p)?)
        }
        Command::Limits { common, tol, iters } => {
            let p = read_problem(common.input.as_ref())?;
            (common, cmd_limits(&p, &LimitOptions { tol: *tol, max_iters: *iters }, common.precision)?)
        }
        Command::Scale { common, iters, tol, trace } => {
            let p = read_problem(common.input.as_ref())?;
            (common, cmd_scale(&p, *iters, *tol, trace.as_deref(), common.precision)?)
        }
        Command::Bench { common, tol, iters, trace } => {
            let p = read_problem(common.input.as_ref())?;
            (common, cmd_bench(&p, *tol, *iters, trace.as_deref())?)
        }
    };
    Ok(match common.format {
        Format::Json => report.to_json(),
        Format::Text => report::render_text(&report, common.precision.unwrap_or(6)),
    })
}

/// Entry point used by the binary.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| execute(&cli)) {
        Ok(Ok(text)) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            ExitCode::SUCCESS
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(1),
    }
}
