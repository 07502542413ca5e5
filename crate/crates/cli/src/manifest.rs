//! Run manifests: the resolved command, input digests and output digests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;
use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Every parameter of the command after defaults, config file and flags.
    pub config: Command,
    pub inputs: Vec<InputDigest>,
    /// Output file name (relative to the output directory) to its digest.
    pub artifacts: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a file, or of a directory as the sorted list of its files'
/// names and digests.
pub fn digest_path(path: &Path) -> Result<String> {
    let meta = fs::metadata(path).map_err(|e| CliError::io(path, e))?;
    if meta.is_file() {
        return Ok(sha256_hex(&fs::read(path).map_err(|e| CliError::io(path, e))?));
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| CliError::io(path, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| CliError::io(path, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    let mut hasher = Sha256::new();
    for entry in entries {
        if entry.is_file() {
            hasher.update(entry.file_name().unwrap_or_default().to_string_lossy().as_bytes());
            hasher.update([0]);
            hasher.update(digest_path(&entry)?.as_bytes());
            hasher.update([b'\n']);
        }
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Collects written artifacts and emits the manifest at the end of a run.
pub struct Outputs {
    dir: PathBuf,
    artifacts: BTreeMap<String, String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.artifacts.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    /// Records a file that was written into the output directory by other code.
    pub fn register(&mut self, name: &str) -> Result<()> {
        let path = self.dir.join(name);
        let digest = digest_path(&path)?;
        self.artifacts.insert(name.to_string(), digest);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(self, command: &Command, seed: u64, inputs: Vec<InputDigest>) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.name().to_string(),
            seed,
            config: command.clone(),
            inputs,
            artifacts: self.artifacts,
        };
        let path = self.dir.join(RunManifest::file_name(command.name()));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}
