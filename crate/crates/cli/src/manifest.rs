//! Run manifests: enough to rerun a command and check its outputs.

use crate::io::{json_bytes, sha256_hex, write_atomic};
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Arguments after the program name.
    pub command_line: Vec<String>,
    /// SHA-256 of each input, keyed by its flag.
    pub config_hashes: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(command_line: Vec<String>) -> RunManifest {
        RunManifest {
            command_line,
            config_hashes: BTreeMap::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, name: &str, bytes: &[u8]) {
        self.config_hashes.insert(name.to_string(), sha256_hex(bytes));
    }

    /// Write an output atomically and record it.
    pub fn emit(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        self.outputs.push(OutputFile { path: path.to_path_buf(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// Manifest location for a primary output `out`: `out.manifest.json`.
    pub fn path_for(out: &Path) -> PathBuf {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &json_bytes(&serde_json::to_value(self)?))
    }

    pub fn read(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_slice(&text).with_context(|| format!("malformed manifest {}", path.display()))
    }

    /// Outputs whose current contents differ from the recorded hashes.
    pub fn mismatches(&self) -> Vec<PathBuf> {
        self.outputs
            .iter()
            .filter(|o| std::fs::read(&o.path).map(|b| sha256_hex(&b) != o.sha256).unwrap_or(true))
            .map(|o| o.path.clone())
            .collect()
    }
}
