use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    /// Canonical text of the configuration sections the run depends on.
    pub config: String,
    /// Seconds since the Unix epoch.
    pub start_time: f64,
    pub end_time: f64,
    pub outputs: Vec<String>,
    pub code_version: String,
    /// Per-run failures that did not abort the command.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

pub fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

impl RunManifest {
    pub fn new(command: &str, run_id: String, config: String) -> Self {
        Self {
            run_id,
            command: command.into(),
            config,
            start_time: now(),
            end_time: 0.0,
            outputs: Vec::new(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            errors: Vec::new(),
        }
    }

    pub fn finish(mut self, dir: &Path, outputs: &[PathBuf]) -> CliResult<PathBuf> {
        self.end_time = now();
        self.outputs = outputs
            .iter()
            .map(|p| p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()))
            .collect();
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// `run_id` recorded in `dir/manifest.json`, if readable.
pub fn read_run_id(dir: &Path) -> Option<String> {
    let text = std::fs::read_to_string(dir.join("manifest.json")).ok()?;
    let value: serde_json::Value = serde_json::from_str(&text).ok()?;
    value.get("run_id")?.as_str().map(str::to_owned)
}
