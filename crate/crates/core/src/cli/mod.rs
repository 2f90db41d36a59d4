//! Command-line driver: TOML config in, `result.json` and curve CSVs out.
//!
//! `degenmfg <command> --config <path> [--out <dir>] [--threads N]`. Exit codes:
//! 0 success, 1 I/O, 2 invalid config, 3 solver non-convergence, 4 more than half
//! of the Carleman sweep overflowed.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::Parser;

pub use config::{
    config_hash, BundleSource, CarlemanSection, CaseRef, CoeffCheckSection, Command,
    ConvergenceSection, RunConfig, SolveSection, StabilitySection, DEFAULT_HOLDER_LADDER,
    DEFAULT_LOG_LADDER, MAX_NT, MAX_NX,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_OVERFLOW: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot parse config: {0}")]
    Parse(String),

    #[error("invalid config field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error(transparent)]
    Core(#[from] crate::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            CliError::Parse(_) | CliError::Validation { .. } => EXIT_VALIDATION,
            CliError::Core(E::NotConverged(_) | E::SingularSystem { .. } | E::NonFinite(_)) => {
                EXIT_NOT_CONVERGED
            }
            CliError::Core(_) => EXIT_VALIDATION,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => EXIT_IO,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Validation { .. } => "validation",
            CliError::Core(_) if self.exit_code() == EXIT_NOT_CONVERGED => "solver",
            CliError::Core(_) => "validation",
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => "io",
        }
    }

    /// Config field the error points at, when known.
    fn field(&self) -> Option<String> {
        match self {
            CliError::Validation { field, .. } => Some(field.clone()),
            CliError::Core(crate::Error::InvalidParameter { name, .. }) => Some(name.to_string()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "degenmfg", version, about = "Degenerate mean-field game backward-problem lab")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for result.json and CSVs.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps and ladders (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Runs one command and returns the process exit code. Failures leave a
/// `diagnostics.json` in the output directory.
pub fn run(args: &Args) -> i32 {
    if let Some(n) = args.threads {
        if n == 0 {
            return fail(args, CliError::Validation {
                field: "--threads".into(),
                reason: "must be at least 1".into(),
            });
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match commands::execute(args) {
        Ok(code) => code,
        Err(e) => fail(args, e),
    }
}

fn fail(args: &Args, e: CliError) -> i32 {
    let code = e.exit_code();
    eprintln!("degenmfg {}: {e}", args.command.name());
    let diag = serde_json::json!({
        "command": args.command.name(),
        "exit_code": code,
        "kind": e.kind(),
        "field": e.field(),
        "message": e.to_string(),
    });
    if let Err(w) = output::Artifacts::create(&args.out).and_then(|a| a.json("diagnostics.json", &diag)) {
        eprintln!("degenmfg: could not write diagnostics: {w}");
    }
    code
}
