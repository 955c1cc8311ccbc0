//! Reproducibility manifest: run metadata plus a SHA-256 for every output file.
//!
//! Text format, sorted for stable output:
//! `key = value` lines, then `file <relative path> = <sha256 hex>` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::MANIFEST_FILE;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub meta: BTreeMap<String, String>,
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Manifest::default();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key.strip_prefix("file ") {
                Some(path) => m.files.insert(path.to_string(), value.to_string()),
                None => m.meta.insert(key.to_string(), value.to_string()),
            };
        }
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# thickwalk manifest\n");
        for (k, v) in &self.meta {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (k, v) in &self.files {
            let _ = writeln!(s, "file {k} = {v}");
        }
        s
    }

    /// The manifest in `dir`, or an empty one if there is none yet.
    pub fn load_or_default(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        match fs::read_to_string(&path) {
            Ok(text) => Self::parse(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        // Values are single-line by construction of the format.
        let value = value.to_string().replace('\n', " ");
        self.meta.insert(key.into(), value);
    }

    /// Hashes `dir/rel` and records it.
    pub fn record_file(&mut self, dir: &Path, rel: &str) -> Result<()> {
        let path = dir.join(rel);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        self.files.insert(rel.to_string(), sha256_hex(&bytes));
        Ok(())
    }

    /// Files whose current content no longer matches the recorded checksum.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|(rel, sum)| fs::read(dir.join(rel)).map_or(true, |b| sha256_hex(&b) != **sum))
            .map(|(rel, _)| rel.clone())
            .collect()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        super::write_atomic(dir, MANIFEST_FILE, self.to_text().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
