//! Run manifests: a JSON snapshot of the resolved configuration, seeds,
//! timings, and produced files, sufficient to reproduce the run.

use crate::error::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Resolved configuration snapshot, per section (model, trajectory, ...).
    pub resolved: BTreeMap<String, Value>,
    /// Every seed the run consumed, by role.
    pub seeds: BTreeMap<String, u64>,
    pub timings_ms: BTreeMap<String, u64>,
    /// Every file the run wrote, relative to the manifest's directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: "lyapq".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            resolved: BTreeMap::new(),
            seeds: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record<T: Serialize>(&mut self, section: &str, value: &T) {
        self.resolved.insert(
            section.to_string(),
            serde_json::to_value(value).expect("serializable config"),
        );
    }

    pub fn record_seed(&mut self, role: &str, seed: u64) {
        self.seeds.insert(role.to_string(), seed);
    }

    pub fn record_timing(&mut self, phase: &str, ms: u64) {
        self.timings_ms.insert(phase.to_string(), ms);
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.to_string_lossy().into_owned());
    }

    /// Write to `<dir>/manifest.json` and return the path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
