use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use monoembed_core::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

pub const TOOL_VERSION: &str = concat!("monoembed ", env!("CARGO_PKG_VERSION"));

/// Everything needed to reproduce one command's outputs. Contains no clocks
/// or host details, so identical runs write identical manifests.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_snapshot: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub input_hashes: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            config_snapshot: serde_json::to_value(config)?,
            seeds: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
            outputs: Vec::new(),
            tool_version: TOOL_VERSION.to_string(),
        })
    }

    pub fn seed(&mut self, name: &str, value: u64) -> &mut Self {
        self.seeds.insert(name.to_string(), value);
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        self.input_hashes.insert(path.display().to_string(), hash_path(path)?);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// Writes the manifest as `<file>.manifest.json`, or `manifest.json`
    /// inside an output directory.
    pub fn write_beside(&self, output: &Path) -> Result<PathBuf> {
        let path = manifest_path(output);
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    if output.is_dir() {
        output.join("manifest.json")
    } else {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        output.with_file_name(name)
    }
}

/// SHA-256 of a file, or of a directory's files (relative path and content,
/// in sorted order; earlier manifests are skipped).
pub fn hash_path(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    if path.is_dir() {
        for entry in WalkDir::new(path).sort_by_file_name() {
            let entry = entry.map_err(|e| Error::io(path, e.into()))?;
            let name = entry.file_name().to_string_lossy();
            if !entry.file_type().is_file() || name.ends_with("manifest.json") {
                continue;
            }
            let rel = entry.path().strip_prefix(path).unwrap_or(entry.path());
            let rel = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            let bytes = fs::read(entry.path()).map_err(|e| Error::io(entry.path(), e))?;
            hasher.update(rel.as_bytes());
            hasher.update([0]);
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(&bytes);
        }
    } else {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}
