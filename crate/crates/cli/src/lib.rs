//! Library half of the `graphpot` binary, so tests can drive it in-process.

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

pub mod args;
mod commands;
pub mod config;
pub mod graphs;
pub mod report;

pub use args::Cli;
pub use report::{emit_report, Format, RunReport, SCHEMA_VERSION};

use commands::Output;
use config::Settings;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] graphpot::Error),
}

impl CliError {
    /// 3 for numerical failures, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_solver_failure() => 3,
            _ => 2,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.code(),
        }
    }
}

/// Process result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn error_outcome(code: &str, message: &str, exit_code: i32, stderr: String) -> Outcome {
    let body = json!({
        "schema_version": SCHEMA_VERSION,
        "error": { "code": code, "message": message, "exit_code": exit_code },
    });
    let mut stdout = serde_json::to_string_pretty(&body).expect("serializable");
    stdout.push('\n');
    Outcome { code: exit_code, stdout, stderr }
}

/// The verdict `--strict` looks at.
fn primary_verdict(subcommand: &str) -> &'static str {
    match subcommand {
        "classify" => "type",
        "capacity" => "capacity",
        "green" => "green",
        "monopole" => "energy",
        "heatmass" => "completeness",
        "walk" => "monte_carlo",
        "bridge" => "bridge",
        _ => "verify",
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
///
/// Exit codes: 0 success, 1 inconclusive under `--strict` or a failed
/// `verify`, 2 bad input, 3 solver failure.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome { code: 0, stdout: e.to_string(), stderr: String::new() };
            }
            let rendered = e.render().to_string();
            let message = rendered.lines().next().unwrap_or("usage error").trim_start_matches("error: ").to_string();
            return error_outcome("usage", &message, 2, rendered);
        }
    };

    let work = || -> Result<Output, CliError> {
        let settings = Settings::load(cli.global.config.as_deref())?;
        commands::execute(&cli.command, settings)
    };
    let result = match cli.global.threads {
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(e) => Err(CliError::Usage(format!("cannot start thread pool: {e}"))),
        },
        None => work(),
    };

    match result {
        Err(e) => {
            let message = e.to_string();
            error_outcome(e.code(), &message, e.exit_code(), format!("error: {message}\n"))
        }
        Ok(Output::Text(text)) => Outcome { code: 0, stdout: text, stderr: String::new() },
        Ok(Output::Report(mut report)) => {
            if cli.global.no_timings {
                report.timings = None;
            }
            let mut code = 0;
            if report.verdicts.get("verify").is_some_and(|v| v == "failed") {
                code = 1;
            }
            let primary = report.verdicts.get(primary_verdict(&report.subcommand)).map(String::as_str);
            if cli.global.strict && matches!(primary, Some("inconclusive" | "undetermined")) {
                code = 1;
            }
            Outcome { code, stdout: emit_report(&report, cli.global.format), stderr: String::new() }
        }
    }
}
