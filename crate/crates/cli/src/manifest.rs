//! Run manifest written next to every output.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use pemfc_core::ModelConfig;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_path: String,
    /// SHA-256 of the resolved configuration in canonical TOML form.
    pub parameter_hash: String,
    pub seed: Option<u64>,
    pub output_dir: String,
    pub arguments: Vec<(String, String)>,
}

pub fn config_hash(cfg: &ModelConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml_string().as_bytes()))
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_path: &Path,
        cfg: &ModelConfig,
        seed: Option<u64>,
        out: &Path,
        arguments: Vec<(String, String)>,
    ) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_path: config_path.display().to_string(),
            parameter_hash: config_hash(cfg),
            seed,
            output_dir: out.display().to_string(),
            arguments,
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join("manifest.json"), text + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ModelConfig::eh31();
        assert_eq!(config_hash(&a), config_hash(&ModelConfig::eh31()));
        let mut b = ModelConfig::eh31();
        b.operating.t_fc += 1.0;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
