use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub seed: u64,
    /// Swept parameter value, for sweep runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// Per-run output directory relative to the output directory, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub created_unix_s: u64,
    /// `None` when the bundled reference scenario was used.
    pub config_path: Option<String>,
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_parameter: Option<String>,
    pub runs: Vec<RunEntry>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn new(command: &str, config_path: Option<&Path>, config_bytes: &[u8], seeds: Vec<u64>) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            created_unix_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config_path: config_path.map(|p| p.display().to_string()),
            config_sha256: sha256_hex(config_bytes),
            seeds,
            sweep_parameter: None,
            runs: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn record(&mut self, out: &Path, rel: &str) -> Result<(), CliError> {
        let sha256 = sha256_file(&out.join(rel))?;
        self.files.push(FileEntry {
            path: rel.to_string(),
            sha256,
        });
        Ok(())
    }

    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        write_atomic(&out.join(MANIFEST_FILE), &bytes)
    }

    /// Loads the manifest in `out` and checks its schema and every file hash.
    pub fn load_verified(out: &Path) -> Result<Self, CliError> {
        let path = out.join(MANIFEST_FILE);
        let bytes = fs::read(&path).map_err(|_| CliError::ManifestMissing(path.clone()))?;
        let raw: serde_json::Value =
            serde_json::from_slice(&bytes).map_err(|e| CliError::ManifestInvalid(e.to_string()))?;
        let version = raw.get("schema_version").and_then(|v| v.as_u64());
        if version != Some(SCHEMA_VERSION as u64) {
            return Err(CliError::SchemaUnsupported(version));
        }
        let manifest: RunManifest =
            serde_json::from_value(raw).map_err(|e| CliError::ManifestInvalid(e.to_string()))?;
        for f in &manifest.files {
            let actual = sha256_file(&out.join(&f.path))?;
            if actual != f.sha256 {
                return Err(CliError::HashMismatch(f.path.clone()));
            }
        }
        Ok(manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = temp_beside(path)?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    persist(tmp, path)
}

pub fn temp_beside(path: &Path) -> Result<tempfile::NamedTempFile, CliError> {
    let dir: PathBuf = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))
}

pub fn persist(tmp: tempfile::NamedTempFile, path: &Path) -> Result<(), CliError> {
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
