//! Staged output files, committed only after the whole scenario succeeds.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// In-memory table written as CSV with a header row.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| fmt_f64(*x))).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Files produced by a scenario, held in memory until [`Staged::commit`].
#[derive(Debug, Default)]
pub struct Staged {
    files: BTreeMap<String, Vec<u8>>,
}

impl Staged {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> CliResult<()> {
        self.files.insert(name.to_string(), table.to_bytes()?);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        bytes.push(b'\n');
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    /// Writes every file atomically, then the manifest. On failure, files
    /// already renamed into place are removed again.
    pub fn commit(self, dir: &Path, manifest: impl FnOnce(BTreeMap<String, String>) -> RunManifest) -> CliResult<PathBuf> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        let checksums: BTreeMap<String, String> = self
            .files
            .iter()
            .map(|(k, v)| (k.clone(), hex::encode(Sha256::digest(v))))
            .collect();
        let mut written = Vec::new();
        let result = (|| {
            for (name, bytes) in &self.files {
                let path = dir.join(name);
                atomic_write(dir, &path, bytes)?;
                written.push(path);
            }
            let m = manifest(checksums);
            let mut bytes = serde_json::to_vec_pretty(&m).map_err(|e| CliError::Io(e.to_string()))?;
            bytes.push(b'\n');
            let path = dir.join(MANIFEST_NAME);
            atomic_write(dir, &path, &bytes)?;
            Ok(path)
        })();
        if result.is_err() {
            for p in written {
                let _ = std::fs::remove_file(p);
            }
        }
        result
    }
}

fn atomic_write(dir: &Path, path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub compute_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub scenario: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub config: String,
    pub checksums: BTreeMap<String, String>,
    pub timings: Timings,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn commit_writes_manifest_with_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let mut staged = Staged::new();
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0, 2.0]);
        staged.csv("t.csv", &t).unwrap();
        let path = staged
            .commit(dir.path(), |checksums| RunManifest {
                version: "0".into(),
                scenario: "x".into(),
                seed: 0,
                threads: None,
                config: String::new(),
                checksums,
                timings: Timings {
                    compute_seconds: 0.0,
                    total_seconds: 0.0,
                },
            })
            .unwrap();
        let m: serde_json::Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
        let expect = hex::encode(Sha256::digest(std::fs::read(dir.path().join("t.csv")).unwrap()));
        assert_eq!(m["checksums"]["t.csv"], expect);
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert!(text.starts_with("a,b\n1.0000000000000000e0,"));
    }
}
