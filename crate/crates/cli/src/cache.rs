//! On-disk cache of computed objects.
//!
//! Each entry is a small JSON wrapper around the object's own JSON text:
//! the wrapper records the cache schema, the key, the producing version and
//! a SHA-256 of the payload. Anything that does not check out is treated as
//! a miss, so a damaged file costs a recomputation and nothing else.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "wce-cache/1";
const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Cache { dir }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    /// The payload stored under `key`, if present and intact.
    pub fn load(&self, key: &str) -> Option<String> {
        let path = self.path(key)?;
        let text = fs::read_to_string(&path).ok()?;
        match unwrap_entry(&text, key) {
            Ok(payload) => Some(payload),
            Err(why) => {
                eprintln!("cache: ignoring {} ({why}); recomputing", path.display());
                None
            }
        }
    }

    /// Loads and decodes, treating a payload that fails to decode as a miss.
    pub fn load_with<T, E: std::fmt::Display>(&self, key: &str, decode: impl FnOnce(&str) -> Result<T, E>) -> Option<T> {
        let payload = self.load(key)?;
        match decode(&payload) {
            Ok(v) => Some(v),
            Err(e) => {
                eprintln!("cache: entry {key} does not decode ({e}); recomputing");
                None
            }
        }
    }

    /// Writes atomically. Failures are reported and otherwise ignored since
    /// the result is already in hand.
    pub fn store(&self, key: &str, kind: &str, payload: &str) {
        let Some(path) = self.path(key) else { return };
        if let Err(e) = write_atomic(&path, &wrap_entry(key, kind, payload)) {
            eprintln!("cache: could not write {}: {e}", path.display());
        }
    }
}

fn wrap_entry(key: &str, kind: &str, payload: &str) -> String {
    let v = json!({
        "schema": SCHEMA,
        "version": VERSION,
        "kind": kind,
        "key": key,
        "checksum": sha256_hex(payload.as_bytes()),
        "payload": payload,
    });
    serde_json::to_string_pretty(&v).expect("cache entry serializes")
}

fn unwrap_entry(text: &str, key: &str) -> Result<String, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("not JSON: {e}"))?;
    let field = |name: &str| v.get(name).and_then(Value::as_str).ok_or_else(|| format!("missing {name}"));
    if field("schema")? != SCHEMA {
        return Err("schema mismatch".into());
    }
    if field("version")? != VERSION {
        return Err("written by a different version".into());
    }
    if field("key")? != key {
        return Err("key mismatch".into());
    }
    let payload = field("payload")?;
    if sha256_hex(payload.as_bytes()) != field("checksum")? {
        return Err("checksum mismatch".into());
    }
    Ok(payload.to_string())
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("entry"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_round_trip_and_reject_tampering() {
        let wrapped = wrap_entry("k", "tau", "{\"a\": 1}");
        assert_eq!(unwrap_entry(&wrapped, "k").unwrap(), "{\"a\": 1}");
        assert!(unwrap_entry(&wrapped, "other").is_err());
        let tampered = wrapped.replace("\\\"a\\\": 1", "\\\"a\\\": 2");
        assert_ne!(tampered, wrapped);
        assert_eq!(unwrap_entry(&tampered, "k").unwrap_err(), "checksum mismatch");
        assert!(unwrap_entry("{ not json", "k").is_err());
    }

    #[test]
    fn disabled_cache_never_hits() {
        let c = Cache::new(None);
        c.store("k", "tau", "x");
        assert!(c.load("k").is_none());
    }
}
