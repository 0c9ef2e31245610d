//! Result files: CSV and JSON encoders and an all-or-nothing writer.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Version stamped into every JSON document and CSV header comment.
pub const SCHEMA_VERSION: u32 = 1;

/// Output files staged in memory and written together.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// `(name, sha256)` of every staged file, in insertion order.
    pub fn digests(&self) -> Vec<(String, String)> {
        self.files.iter().map(|(n, b)| (n.clone(), sha256_hex(b))).collect()
    }

    /// Writes every file to a temporary sibling first and renames only once
    /// all of them were written, so a failure leaves no result files behind.
    pub fn commit(self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        for (name, _) in &self.files {
            if Path::new(name).file_name().is_none_or(|f| f != name.as_str()) {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    format!("output name {name:?} is not a plain file name"),
                ));
            }
        }
        std::fs::create_dir_all(dir)?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let mut tmp = tempfile::Builder::new().prefix(".staging-").tempfile_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, path) in staged {
            if let Err(e) = tmp.persist(&path) {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                return Err(e.error);
            }
            written.push(path);
        }
        Ok(written)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("result types serialize");
    out.push(b'\n');
    out
}

/// RFC 4180 CSV with a header row.
pub fn to_csv<S: AsRef<str>>(header: &[S], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header.iter().map(|h| h.as_ref())).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Shortest decimal that round-trips, so reruns produce identical bytes.
pub fn num(x: f64) -> String {
    format!("{x}")
}
