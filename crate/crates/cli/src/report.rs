//! Run reports: config provenance and output manifest, printed to stdout so
//! that data files stay byte-deterministic.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub rows: usize,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// Canonical serialized form of the effective config.
    pub config: String,
    /// SHA-256 of the canonical config text.
    pub config_sha256: String,
    pub outputs: Vec<OutputEntry>,
    pub wall_time_ms: u128,
}

impl RunReport {
    pub fn new(command: &str, canonical_config: String) -> Self {
        let digest = Sha256::digest(canonical_config.as_bytes());
        Self {
            command: command.to_string(),
            config: canonical_config,
            config_sha256: hex::encode(digest),
            outputs: Vec::new(),
            wall_time_ms: 0,
        }
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("report rendering cannot fail")
    }
}
