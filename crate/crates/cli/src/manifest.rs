//! Run manifests.
//!
//! Every output file is paired with `<output>.manifest.toml` recording the
//! tool version, the resolved invocation and (for config-driven commands)
//! the fully resolved configuration. Re-running the recorded invocation
//! reproduces the output bytes exactly at any worker count; `mtp run
//! --manifest <file>` replays a run directly from the embedded config.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mtp_core::mc::ScenarioConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepInfo {
    pub axis: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Resolved argument vector (binary name and --threads excluded;
    /// thread count never affects output bytes).
    pub argv: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<ScenarioConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep: Option<SweepInfo>,
}

impl Manifest {
    pub fn new(subcommand: &str, argv: Vec<String>, outputs: Vec<String>) -> Self {
        Manifest {
            tool: "mtp".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            argv,
            outputs,
            seed: None,
            reps: None,
            config: None,
            sweep: None,
        }
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".manifest.toml");
    output.with_file_name(name)
}

pub fn write_manifest(output: &Path, manifest: &Manifest) -> Result<()> {
    let path = manifest_path(output);
    let body = toml::to_string_pretty(manifest).context("serializing manifest")?;
    std::fs::write(&path, body)
        .with_context(|| format!("writing manifest {}", path.display()))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("reading manifest {}", path.display()))?;
    toml::from_str(&body).with_context(|| format!("parsing manifest {}", path.display()))
}
