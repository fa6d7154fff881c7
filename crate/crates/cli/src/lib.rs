//! Command-line front end: build, classify, simulate, verify, emit-figure.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | residual or verification failure, or explicit `B` off-pattern |
//! | 2 | unreadable input or invalid arguments |
//! | 3 | degenerate tangency form or violated torus hypothesis |
//! | 4 | integration advisory under `--strict` |

pub mod args;
pub mod commands;
pub mod format;
pub mod spec;

use std::io::Write;

use thiserror::Error;

pub use args::{Cli, Command};
pub use spec::SystemSpec;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse spec: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("explicit B does not match the inelastic pattern at {} entries", .0.len())]
    Pattern(Vec<(usize, usize, f64, f64)>),
    #[error("degenerate input ({reason}): {message}")]
    Degenerate {
        reason: &'static str,
        message: String,
        /// Offending polynomial terms, when the reason is a violated
        /// hypothesis.
        terms: Vec<(String, f64)>,
    },
    #[error("{0}")]
    Core(#[from] filippov_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Pattern(_) => 1,
            CliError::Core(_) => 1,
            CliError::Parse(_) | CliError::Io(_) | CliError::Usage(_) => 2,
            CliError::Degenerate { .. } => 3,
        }
    }
}

/// What a command produced: text for stdout, a note for stderr, and the
/// exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Runs a parsed command line and writes its output; returns the exit code.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match commands::dispatch(&cli.command) {
        Ok(out) => {
            let _ = stdout.write_all(out.stdout.as_bytes());
            let _ = stderr.write_all(out.stderr.as_bytes());
            out.code
        }
        Err(err) => {
            let _ = stdout.write_all(commands::error_json(&err).as_bytes());
            let _ = writeln!(stderr, "error: {err}");
            err.exit_code()
        }
    }
}
