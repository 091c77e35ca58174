use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: Value,
    pub model_sha256: Option<String>,
    pub seed: u64,
    pub version: &'static str,
    pub duration_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects manifest fields while a command runs.
pub struct ManifestBuilder {
    started: Instant,
    command_line: Vec<String>,
    seed: u64,
    pub model_sha256: Option<String>,
}

impl ManifestBuilder {
    pub fn start(command_line: Vec<String>, seed: u64) -> Self {
        Self { started: Instant::now(), command_line, seed, model_sha256: None }
    }

    pub fn finish(&self, config: Value) -> RunManifest {
        RunManifest {
            command_line: self.command_line.clone(),
            config,
            model_sha256: self.model_sha256.clone(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
            duration_seconds: self.started.elapsed().as_secs_f64(),
        }
    }
}

/// `{"manifest": ..., "result": ...}` as pretty JSON.
pub fn envelope<T: Serialize>(manifest: &RunManifest, result: &T) -> String {
    let doc = serde_json::json!({ "manifest": manifest, "result": result });
    let mut s = serde_json::to_string_pretty(&doc).expect("output serializes");
    s.push('\n');
    s
}
