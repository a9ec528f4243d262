use std::io::Write;
use std::process::ExitCode;

use efpf_kit_cli::error::CliError;

/// `EFPF_KIT_THREADS=n` with `n > 0` fixes the worker count; 0 or unset
/// leaves the default.
fn set_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("EFPF_KIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("EFPF_KIT_THREADS must be a count, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    if let Err(e) = set_threads() {
        eprintln!("{}", e.line());
        return ExitCode::from(e.exit_code());
    }
    let outcome = efpf_kit_cli::run(std::env::args_os().collect());
    if std::io::stdout().write_all(&outcome.stdout).is_err() {
        let e = CliError::Io("cannot write to stdout".into());
        eprintln!("{}", e.line());
        return ExitCode::from(e.exit_code());
    }
    if !outcome.stderr.is_empty() {
        eprintln!("{}", outcome.stderr);
    }
    ExitCode::from(outcome.code)
}
