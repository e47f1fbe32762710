//! Per-run provenance record written next to a command's primary output.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::io::{atomic_write, read_file, sha256_hex, to_json};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Every option the command ran with.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub timing: Timing,
}

/// `out.png` → `out.manifest.json`.
pub fn manifest_path(primary: &Path) -> PathBuf {
    primary.with_extension("manifest.json")
}

/// Collects inputs and outputs while a command runs.
pub struct Run {
    command: &'static str,
    started: Instant,
    started_unix_ms: u128,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

impl Run {
    pub fn start(command: &'static str) -> Self {
        Self {
            command,
            started: Instant::now(),
            started_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Reads an input file and records its checksum.
    pub fn read(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = read_file(path)?;
        self.record_input(path, &bytes);
        Ok(bytes)
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(FileDigest {
            path: path.to_path_buf(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        atomic_write(path, bytes)?;
        self.outputs.push(FileDigest {
            path: path.to_path_buf(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn finish<C: Serialize>(self, config: &C, seed: Option<u64>, primary: &Path) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: segcodec_core::VERSION.to_string(),
            config: serde_json::to_value(config)
                .map_err(|e| crate::error::CliError::Internal(format!("serializing config: {e}")))?,
            seed,
            inputs: self.inputs,
            outputs: self.outputs,
            timing: Timing {
                started_unix_ms: self.started_unix_ms,
                elapsed_ms: self.started.elapsed().as_secs_f64() * 1e3,
            },
        };
        atomic_write(&manifest_path(primary), &to_json(&manifest)?)?;
        Ok(manifest)
    }
}
