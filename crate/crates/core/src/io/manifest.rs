//! Provenance record written next to every set of results.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::output::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to rerun a command: passing the manifest back as
/// `--config` reproduces the result files byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Effective configuration with every default filled in.
    pub config: RunConfig,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, threads: usize, started_unix_ms: u128) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: config.seed,
            threads,
            started_unix_ms,
            finished_unix_ms: now_unix_ms(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            config: config.clone(),
        }
    }
}

pub fn now_unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}
