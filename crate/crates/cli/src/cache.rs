//! Result cache and artifact files. Cache entries live under
//! `<out>/.chaoslab-cache/` and are keyed by the SHA-256 of the command, the
//! crate version and the canonical config; files are written to a temporary
//! name and renamed into place.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};
use crate::error::{CliError, Result};

pub const CACHE_DIR: &str = ".chaoslab-cache";

pub fn cache_key(kind: &str, cfg: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(concat!("chaoslab ", env!("CARGO_PKG_VERSION"), "\n"));
    h.update(kind.as_bytes());
    h.update(b"\n");
    h.update(cfg.file.canonical().as_bytes());
    hex(&h.finalize())
}

pub fn cache_path(kind: &str, cfg: &RunConfig) -> PathBuf {
    cfg.out.join(CACHE_DIR).join(format!("{}.json", cache_key(kind, cfg)))
}

/// Returns the cached value for `kind` under this config, or computes and
/// stores it. Bypassed when caching is off or timings are requested.
pub fn cached<T, F>(cfg: &RunConfig, kind: &str, compute: F) -> Result<T>
where
    T: Serialize + DeserializeOwned,
    F: FnOnce() -> Result<T>,
{
    if !cfg.cache || cfg.timings {
        return compute();
    }
    let path = cache_path(kind, cfg);
    if let Ok(bytes) = std::fs::read(&path) {
        // A corrupt entry is recomputed and overwritten.
        if let Ok(v) = serde_json::from_slice(&bytes) {
            return Ok(v);
        }
    }
    let value = compute()?;
    let json = serde_json::to_vec(&value).expect("cacheable values serialize");
    write_atomic(&path, &json)?;
    Ok(value)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Writes `<out>/<stem>.csv` and/or `<out>/<stem>.json` per the configured
/// format and returns the paths written.
pub fn write_artifacts(cfg: &RunConfig, stem: &str, csv: impl FnOnce() -> String, json: impl FnOnce() -> String) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if cfg.format.csv() {
        let p = cfg.out.join(format!("{stem}.csv"));
        write_atomic(&p, csv().as_bytes())?;
        written.push(p);
    }
    if cfg.format.json() {
        let p = cfg.out.join(format!("{stem}.json"));
        write_atomic(&p, json().as_bytes())?;
        written.push(p);
    }
    Ok(written)
}
