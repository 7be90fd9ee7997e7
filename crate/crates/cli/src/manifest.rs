//! Artifact collection and the run manifest.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: Vec<usize>,
    pub coords: Vec<f64>,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recipe: Option<String>,
    pub config_hash: String,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` when set.
    pub started_unix: u64,
    pub finished_unix: u64,
    pub files: Vec<FileEntry>,
    pub failures: Vec<PointFailure>,
}

pub fn now_unix() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Buffers artifacts in memory and writes them, plus the manifest, in one place.
pub struct Collector {
    dir: PathBuf,
    command: String,
    recipe: Option<String>,
    started: u64,
    files: Vec<(String, Vec<u8>)>,
    failures: Vec<PointFailure>,
}

impl Collector {
    pub fn new(dir: &Path, command: &str, recipe: Option<&str>) -> Self {
        Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            recipe: recipe.map(str::to_string),
            started: now_unix(),
            files: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    pub fn fail(&mut self, failure: PointFailure) {
        self.failures.push(failure);
    }

    pub fn failures(&self) -> &[PointFailure] {
        &self.failures
    }

    /// Writes every artifact, the resolved config and the manifest.
    pub fn finish(mut self, cfg: &ExperimentConfig) -> CliResult<RunManifest> {
        self.add(CONFIG_FILE, cfg.to_toml()?);
        std::fs::create_dir_all(&self.dir)?;
        let mut entries = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            std::fs::write(self.dir.join(name), bytes)?;
            entries.push(FileEntry { name: name.clone(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
        }
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            recipe: self.recipe,
            config_hash: cfg.hash()?,
            started_unix: self.started,
            finished_unix: now_unix(),
            files: entries,
            failures: self.failures,
        };
        let mut json = serde_json::to_string_pretty(&manifest).map_err(pulse_squeeze_core::Error::from)?;
        json.push('\n');
        std::fs::write(self.dir.join(MANIFEST_FILE), json)?;
        Ok(manifest)
    }
}

/// Recompute checksums of the files a manifest lists; returns the names that differ.
pub fn check_manifest(dir: &Path, manifest: &RunManifest) -> CliResult<Vec<String>> {
    let mut bad = Vec::new();
    for f in &manifest.files {
        let bytes = std::fs::read(dir.join(&f.name))?;
        if sha256_hex(&bytes) != f.sha256 {
            bad.push(f.name.clone());
        }
    }
    Ok(bad)
}
