#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_efpf-kit");

pub use efpf_kit_cli::golden::GOLDEN;

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("EFPF_KIT_THREADS", "0")
        .output()
        .expect("binary runs")
}

pub fn run_line(line: &str) -> Output {
    run(&line.split_whitespace().collect::<Vec<_>>())
}

/// Compares `actual` with the named golden file, or rewrites the file when
/// `UPDATE_GOLDEN` is set. Returns a mismatch description.
pub fn compare_golden(name: &str, actual: &[u8]) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).map_err(|e| format!("{name}: {e}"))?;
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{name}: {e}"))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!(
            "{name} differs\n--- expected\n{}\n--- actual\n{}",
            String::from_utf8_lossy(&expected),
            String::from_utf8_lossy(actual)
        ))
    }
}

/// Runs every pinned command and checks its output; one entry per command.
pub fn check_all_golden() -> Vec<(String, Result<(), String>)> {
    GOLDEN
        .iter()
        .map(|(name, line)| {
            let out = run_line(line);
            let res = if out.status.success() {
                compare_golden(name, &out.stdout)
            } else {
                Err(format!(
                    "{name}: exit {:?}: {}",
                    out.status.code(),
                    String::from_utf8_lossy(&out.stderr)
                ))
            };
            (name.to_string(), res)
        })
        .collect()
}
