//! Flat key=value config files and their merge with command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use crate::run::{self, CliError};

/// Parse a config file: one `key = value` pair per line, `#` starts a
/// comment, blank lines are skipped. Later assignments win.
pub fn load(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config {}:{}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Build the canonical parameter map for one subcommand: documented defaults,
/// overridden by config-file values, overridden by explicit flags. Config
/// keys that the subcommand does not use are reported once and skipped, so a
/// single file can configure several runs.
pub fn resolve_params(
    sub: &str,
    flags: &[(&'static str, Option<String>)],
    file: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, String>, CliError> {
    let schema = run::schema(sub)
        .ok_or_else(|| CliError::Usage(format!("unknown subcommand '{sub}'")))?;
    let mut params: BTreeMap<String, String> =
        schema.iter().map(|(k, d)| (k.to_string(), d.to_string())).collect();

    for (key, value) in file {
        if params.contains_key(key) {
            params.insert(key.clone(), value.clone());
        } else if !matches!(key.as_str(), "seed" | "format") {
            eprintln!("warning: config key '{key}' is not used by '{sub}'");
        }
    }
    for (key, value) in flags {
        debug_assert!(params.contains_key(*key), "flag {key} missing from schema of {sub}");
        if let Some(v) = value {
            params.insert(key.to_string(), v.clone());
        }
    }
    Ok(params)
}

/// Flag > config > default lookup for the two globals that live outside the
/// parameter map proper.
pub fn resolve_global(
    flag: &Option<String>,
    file: &BTreeMap<String, String>,
    key: &str,
    default: &str,
) -> String {
    flag.clone()
        .or_else(|| file.get(key).cloned())
        .unwrap_or_else(|| default.to_string())
}
