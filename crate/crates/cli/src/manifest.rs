use std::path::Path;

use hqc_core::experiments::SCHEMA_REVISION;
use hqc_core::ExperimentConfig;
use serde::{Deserialize, Serialize};

/// Everything needed to reproduce a sweep. Timestamps and wall time live
/// only here, never in the data files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_revision: String,
    pub tool_version: String,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub threads: usize,
    pub rng_algorithm: String,
    pub started_unix_seconds: u64,
    pub wall_time_seconds: f64,
    pub total_steps: usize,
    pub max_unitarity_defect: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(experiment: &str, config: &ExperimentConfig, threads: usize) -> Self {
        Self {
            schema_revision: SCHEMA_REVISION.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            config: config.clone(),
            master_seed: config.master_seed,
            threads,
            rng_algorithm: hqc_core::control::RNG_ALGORITHM.to_string(),
            started_unix_seconds: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            wall_time_seconds: 0.0,
            total_steps: 0,
            max_unitarity_defect: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(std::io::Error::other)? + "\n";
        std::fs::write(path, json)
    }
}
