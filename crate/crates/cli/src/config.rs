//! Flat `key=value` config files, expanded into command-line flags.

use std::ffi::OsString;

use crate::error::{CliError, CliResult};
use crate::golden::SUBCOMMANDS;

const BOOLEAN_KEYS: &[&str] = &["assert", "brute-force"];

/// Parses config text into flags. Keys are flag names without the leading
/// dashes (underscores allowed); `command` names the subcommand. Blank lines
/// and lines starting with `#` are skipped.
pub fn parse(text: &str) -> CliResult<(Option<String>, Vec<String>)> {
    let mut command = None;
    let mut flags = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected key=value, got {line:?}",
                no + 1
            ))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "command" {
            command = Some(value.to_string());
        } else if BOOLEAN_KEYS.contains(&key.as_str()) {
            match value {
                "true" | "1" | "yes" => flags.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                other => {
                    return Err(CliError::Usage(format!(
                        "config line {}: {key} takes true or false, got {other:?}",
                        no + 1
                    )))
                }
            }
        } else {
            flags.push(format!("--{key}={value}"));
        }
    }
    Ok((command, flags))
}

/// The path given by `--config PATH` or `--config=PATH`, if any.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
        if s == "--" {
            break;
        }
    }
    None
}

/// Inserts config-derived flags right after the subcommand name, ahead of
/// the user's own flags, so that later (user) occurrences win.
pub fn expand(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| {
        CliError::Io(format!(
            "cannot read config {}: {e}",
            path.to_string_lossy()
        ))
    })?;
    let (command, flags) = parse(&text)?;
    let mut out = args;
    let pos = out
        .iter()
        .skip(1)
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map(|p| p + 1);
    let at = match (pos, command) {
        (Some(p), _) => p + 1,
        (None, Some(cmd)) => {
            out.insert(1, cmd.into());
            2
        }
        (None, None) => {
            return Err(CliError::Usage(
                "no subcommand on the command line or in the config".into(),
            ))
        }
    };
    for (j, f) in flags.into_iter().enumerate() {
        out.insert(at + j, f.into());
    }
    Ok(out)
}
