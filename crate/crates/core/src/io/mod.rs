//! Configuration files, record CSVs, fit documents and provenance headers.

pub mod config;
pub mod fitfile;
pub mod records;

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use config::{GridPreset, RunConfig};
pub use fitfile::{read_fit, write_fit};
pub use records::{ingest, ingest_reader, write_records, RejectedRow, ValidationReport, DATA_HEADER};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the package version and a canonical configuration text.
pub fn config_hash(canonical: &str) -> String {
    let mut h = Sha256::new();
    h.update(VERSION.as_bytes());
    h.update([0u8]);
    h.update(canonical.as_bytes());
    hex::encode(h.finalize())
}

/// One comment line naming the version, seed and configuration hash.
pub fn provenance_header(seed: Option<u64>, hash: &str) -> String {
    let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    format!("# persuasion {VERSION} seed={seed} config={hash}\n")
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
