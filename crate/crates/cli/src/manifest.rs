// SPDX-License-Identifier: Apache-2.0

//! Output files and the run manifest written next to them.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("MADDNESS_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<PathBuf>,
    pub seed: u64,
    pub version: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, config: Option<&Path>, seed: u64, outputs: Vec<PathBuf>) -> Self {
        Self {
            command: command.into(),
            config: config.map(Path::to_path_buf),
            seed,
            version: VERSION.into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Data(e.to_string()))?;
        write_atomic(&path, (text + "\n").as_bytes())?;
        Ok(path)
    }
}

/// Write through a temporary file in the same directory and rename it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Collects the files of one run and finishes with the manifest.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        write_atomic(&path, bytes)?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Record a file written elsewhere (e.g. a trace at a user path).
    pub fn record(&mut self, path: PathBuf) {
        self.written.push(path);
    }

    pub fn finish(self, command: &str, config: Option<&Path>, seed: u64) -> Result<PathBuf> {
        RunManifest::new(command, config, seed, self.written).write(&self.dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::create(&dir.path().join("run")).unwrap();
        out.write("a.txt", b"hello").unwrap();
        let m = out.finish("test", None, 9).unwrap();
        let doc: RunManifest = serde_json::from_str(&std::fs::read_to_string(m).unwrap()).unwrap();
        assert_eq!(doc.seed, 9);
        assert_eq!(doc.outputs.len(), 1);
        assert!(doc.version.starts_with('v') || !doc.version.is_empty());
        assert_eq!(std::fs::read(dir.path().join("run/a.txt")).unwrap(), b"hello");
    }
}
