use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance written next to every output file.
#[derive(Serialize, Debug)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub input_file: Option<String>,
    pub input_digest: Option<String>,
    pub timestamp_unix: u64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, serde_yaml::Value>,
}

impl RunManifest {
    pub fn new(input: Option<(&Path, &[u8])>, seed: Option<u64>) -> Self {
        Self {
            command_line: std::env::args().collect(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_file: input.map(|(p, _)| p.display().to_string()),
            input_digest: input.map(|(_, bytes)| format!("sha256:{:x}", Sha256::digest(bytes))),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            details: BTreeMap::new(),
        }
    }

    pub fn detail(mut self, key: &str, value: impl Into<serde_yaml::Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.yaml");
    PathBuf::from(s)
}

/// Writes `body` to `out` plus its manifest, or to stdout when `out` is
/// absent.
pub fn emit(out: Option<&Path>, body: &str, manifest: &RunManifest) -> Result<()> {
    match out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
            let side = sidecar_path(path);
            let yaml = serde_yaml::to_string(manifest)?;
            std::fs::write(&side, yaml).with_context(|| format!("writing {}", side.display()))
        }
    }
}
