use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance of a run directory. Stage entries accumulate across commands
/// run with the same config hash and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub version: String,
    pub seed: u64,
    /// Output files per stage, relative to the run directory.
    pub outputs: BTreeMap<String, Vec<String>>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(config_hash: String, seed: u64) -> Self {
        RunManifest {
            config_hash,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            outputs: BTreeMap::new(),
            timings: BTreeMap::new(),
        }
    }

    /// The manifest in `dir` when it belongs to the same inputs, else a fresh one.
    pub fn open(dir: &Path, config_hash: &str, seed: u64) -> Self {
        std::fs::read(dir.join(MANIFEST_FILE))
            .ok()
            .and_then(|bytes| serde_json::from_slice::<RunManifest>(&bytes).ok())
            .filter(|m| m.config_hash == config_hash && m.seed == seed)
            .unwrap_or_else(|| RunManifest::new(config_hash.to_string(), seed))
    }

    pub fn record(&mut self, stage: &str, outputs: Vec<String>, seconds: f64) {
        self.outputs.insert(stage.to_string(), outputs);
        self.timings.insert(stage.to_string(), seconds);
    }

    pub fn save(&self, dir: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }
}
