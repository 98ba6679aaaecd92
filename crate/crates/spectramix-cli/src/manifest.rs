//! Run manifests: enough recorded state to re-execute a run and check that
//! it still produces the same bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::run::{self, CliError, Format};

#[derive(Serialize, Deserialize)]
pub struct Manifest {
    pub subcommand: String,
    /// canonical parameter map, defaults included, plus `format`
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
    /// artifact path -> sha256 of its bytes
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

pub fn manifest_path(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.manifest.json", out.display()))
}

pub fn write(
    out: &Path,
    sub: &str,
    params: &BTreeMap<String, String>,
    seed: u64,
    artifact: &[u8],
) -> Result<(), CliError> {
    let manifest = Manifest {
        subcommand: sub.to_string(),
        parameters: params.clone(),
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: BTreeMap::from([(out.display().to_string(), sha256_hex(artifact))]),
    };
    let mut text =
        serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    text.push(b'\n');
    let path = manifest_path(out);
    std::fs::write(&path, text)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

/// Re-execute the recorded run and compare digests. Exit 0 when every
/// recorded output is reproduced, 1 on a digest mismatch; a manifest that
/// cannot be parsed or re-run counts as corrupt (exit 2).
pub fn replay(path: &Path) -> Result<u8, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading manifest {}: {e}", path.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("corrupt manifest {}: {e}", path.display())))?;
    if manifest.outputs.is_empty() {
        return Err(CliError::Usage(format!(
            "corrupt manifest {}: no recorded outputs",
            path.display()
        )));
    }
    let format = Format::parse(
        manifest.parameters.get("format").map(String::as_str).unwrap_or("csv"),
    )?;
    let outcome = run::execute(&manifest.subcommand, &manifest.parameters, manifest.seed, format)
        .map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("corrupt manifest: {m}")),
            other => other,
        })?;
    let digest = sha256_hex(&outcome.artifact);
    let ok = manifest.outputs.values().all(|recorded| *recorded == digest);
    for (artifact_path, recorded) in &manifest.outputs {
        eprintln!(
            "replay {}: {} ({artifact_path})",
            manifest.subcommand,
            if *recorded == digest { "digest match" } else { "digest MISMATCH" }
        );
    }
    Ok(u8::from(!ok))
}
