//! Command-line front end for `efpf-core`. The binary is `efpf-kit`; the
//! library half exposes the grammar, the commands, the output encoders and
//! an in-process [`run`] so everything can be tested directly.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod golden;
pub mod output;

use std::ffi::OsString;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::{CliError, CliResult};
use crate::output::Report;

/// What one invocation produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// 0 success, 2 bad input, 3 truncation or feasibility, 4 failed assert.
    pub code: u8,
    pub stdout: Vec<u8>,
    /// The one-line error, empty on success.
    pub stderr: String,
}

/// Runs a full argument vector (program name first) in-process.
pub fn run(args: Vec<OsString>) -> Outcome {
    let mut stdout = Vec::new();
    let failure = match execute(args, &mut stdout) {
        Ok(None) => None,
        Ok(Some(msg)) => Some(CliError::Assert(msg)),
        Err(e) => Some(e),
    };
    match failure {
        None => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Some(e) => Outcome {
            code: e.exit_code(),
            stdout,
            stderr: e.line(),
        },
    }
}

/// Splits a command line on whitespace and runs it.
pub fn run_line(line: &str) -> Outcome {
    let mut args: Vec<OsString> = vec!["efpf-kit".into()];
    args.extend(line.split_whitespace().map(OsString::from));
    run(args)
}

fn execute(args: Vec<OsString>, stdout: &mut Vec<u8>) -> CliResult<Option<String>> {
    let args = config::expand(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            stdout.extend_from_slice(e.to_string().as_bytes());
            return Ok(None);
        }
        Err(e) => {
            // the message up to the usage section, on one line
            let text = e.to_string();
            let msg: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            return Err(CliError::Usage(
                msg.join(" ").trim_start_matches("error: ").to_string(),
            ));
        }
    };
    let (report, out): (Report, &cli::OutputArgs) = match &cli.command {
        Command::Efpf(a) => (commands::efpf(a)?, &a.out),
        Command::Consistency(a) => (commands::consistency(a)?, &a.out),
        Command::Cotrans(a) => (commands::cotrans(a)?, &a.out),
        Command::LimitScan(a) => (commands::limit_scan_cmd(a)?, &a.out),
        Command::Sample(a) => (commands::sample(a)?, &a.out),
        Command::GrowthLaw(a) => (commands::growth_law(a)?, &a.out),
        Command::Identities(a) => (commands::identities(a)?, &a.out),
    };
    let text = report.render(out.output);
    match &out.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => stdout.extend_from_slice(text.as_bytes()),
    }
    Ok(report.failure().map(str::to_string))
}
