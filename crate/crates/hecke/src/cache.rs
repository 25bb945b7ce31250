//! Persistent product cache.  Structure constants are exact and engine
//! versions change them only by fixing bugs, so a record is trusted only when
//! its embedded (schema, engine, system, key pair) all match the request;
//! anything unreadable or mismatched is silently discarded and recomputed.
//! Records are content-addressed by a hash of the lookup tuple and written
//! atomically (temp file + rename), so concurrent processes sharing a cache
//! directory never observe torn records.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_PRODUCT: &str = "hecke.product/1";

/// Storage for structure-constant lists keyed by (system, key, key).
/// Payloads are opaque JSON term lists owned by the coset systems.
pub trait ProductStore: Send + Sync {
    fn get(&self, system: &str, a: &str, b: &str) -> Option<String>;
    fn put(&self, system: &str, a: &str, b: &str, payload: &str);
}

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    schema: String,
    engine: String,
    system: String,
    key1: String,
    key2: String,
    terms: serde_json::Value,
}

/// A directory of one JSON record per cached product.
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    /// Open (and create if needed) a cache directory.  Creation failures are
    /// tolerated: the cache then acts as empty and write-only-into-the-void,
    /// which only costs recomputation.
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        let dir = dir.into();
        let _ = fs::create_dir_all(&dir);
        DiskCache { dir }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn record_path(&self, system: &str, a: &str, b: &str) -> PathBuf {
        let mut h = Sha256::new();
        for part in [crate::doc::ENGINE, system, a, b] {
            h.update(part.as_bytes());
            h.update([0u8]);
        }
        let digest = h.finalize();
        let name: String = digest.iter().map(|byte| format!("{byte:02x}")).collect();
        self.dir.join(format!("{name}.json"))
    }
}

impl ProductStore for DiskCache {
    fn get(&self, system: &str, a: &str, b: &str) -> Option<String> {
        let text = fs::read_to_string(self.record_path(system, a, b)).ok()?;
        let rec: CacheRecord = serde_json::from_str(&text).ok()?;
        let valid = rec.schema == SCHEMA_PRODUCT
            && rec.engine == crate::doc::ENGINE
            && rec.system == system
            && rec.key1 == a
            && rec.key2 == b
            && rec.terms.is_array();
        if !valid {
            return None;
        }
        serde_json::to_string(&rec.terms).ok()
    }

    fn put(&self, system: &str, a: &str, b: &str, payload: &str) {
        let terms: serde_json::Value = match serde_json::from_str(payload) {
            Ok(v) => v,
            Err(_) => return,
        };
        let rec = CacheRecord {
            schema: SCHEMA_PRODUCT.to_string(),
            engine: crate::doc::ENGINE.to_string(),
            system: system.to_string(),
            key1: a.to_string(),
            key2: b.to_string(),
            terms,
        };
        let path = self.record_path(system, a, b);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let body = match serde_json::to_string_pretty(&rec) {
            Ok(s) => s,
            Err(_) => return,
        };
        if fs::write(&tmp, body).is_ok() {
            let _ = fs::rename(&tmp, &path);
        }
    }
}

/// Default cache location: `$XDG_CACHE_HOME/hecke` or `~/.cache/hecke`,
/// falling back to `.hecke-cache` in the working directory when neither
/// variable resolves.  A `HECKE_CACHE_DIR` override is applied by the CLI
/// before this default is consulted.
pub fn default_cache_dir() -> PathBuf {
    if let Ok(d) = std::env::var("XDG_CACHE_HOME") {
        if !d.is_empty() {
            return PathBuf::from(d).join("hecke");
        }
    }
    if let Ok(h) = std::env::var("HOME") {
        if !h.is_empty() {
            return PathBuf::from(h).join(".cache").join("hecke");
        }
    }
    PathBuf::from(".hecke-cache")
}
