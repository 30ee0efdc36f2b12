//! Buffered outputs, run manifests and atomic writes.
//!
//! A subcommand renders every file into memory first. Nothing touches the
//! output directory until the run has succeeded; then each file is written
//! to a temporary name and renamed into place. If any write fails, the
//! files already placed by this run are removed again.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over the parts of a run that determine its CSV contents:
/// subcommand, code version, seed and resolved parameters.
pub fn manifest_hash(config: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(b"genlab-manifest-v1\n");
    h.update(format!("command={}\nversion={VERSION}\nseed={}\n", config.command, config.seed()).as_bytes());
    for (k, v) in config.parameters() {
        h.update(format!("{k}={v}\n").as_bytes());
    }
    hex(&h.finalize())
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub hash: String,
    pub wall_time_seconds: f64,
    /// File name to SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
}

pub struct Outputs {
    hash: String,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new(hash: String) -> Self {
        Self { hash, files: Vec::new() }
    }

    /// CSV whose first line is `# manifest <hash>`.
    pub fn csv<I, S>(&mut self, name: &str, header: &str, rows: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut text = format!("# manifest {}\n{header}\n", self.hash);
        for row in rows {
            text.push_str(row.as_ref());
            text.push('\n');
        }
        self.file(name, text.into_bytes());
    }

    pub fn file(&mut self, name: &str, bytes: Vec<u8>) {
        debug_assert!(!self.files.iter().any(|(n, _)| n == name), "duplicate output {name}");
        self.files.push((name.to_string(), bytes));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Write every buffered file plus `<command>.manifest.json` into `dir`.
    pub fn commit(self, dir: &Path, config: &RunConfig, wall_time_seconds: f64) -> Result<Vec<PathBuf>> {
        let manifest = Manifest {
            command: config.command.to_string(),
            version: VERSION.to_string(),
            seed: config.seed(),
            config: config.parameters(),
            hash: self.hash.clone(),
            wall_time_seconds,
            files: self.files.iter().map(|(n, b)| (n.clone(), hex(&Sha256::digest(b)))).collect(),
        };
        let mut json = serde_json::to_vec_pretty(&manifest)?;
        json.push(b'\n');
        let mut files = self.files;
        files.push((format!("{}.manifest.json", config.command), json));

        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut placed = Placed(Vec::new());
        for (name, bytes) in &files {
            let path = dir.join(name);
            write_atomic(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            placed.0.push(path);
        }
        Ok(std::mem::take(&mut placed.0))
    }
}

/// Paths written so far; removed on drop unless taken.
struct Placed(Vec<PathBuf>);

impl Drop for Placed {
    fn drop(&mut self) {
        for p in &self.0 {
            let _ = fs::remove_file(p);
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
