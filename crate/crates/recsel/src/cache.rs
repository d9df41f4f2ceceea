//! Content-hash keyed artifact cache. Keys are derived from input bytes,
//! never timestamps, so cache hits imply bit-identical inputs.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const CACHE_DIR_ENV: &str = "RECSEL_CACHE_DIR";

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

/// Hex SHA-256 of a byte string.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

/// Hash of a file's contents.
pub fn file_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(content_hash(&bytes))
}

/// Combines several component hashes (stage name, input hashes, config
/// digest) into one key. Order-sensitive by design.
pub fn combine_hashes(parts: &[&str]) -> String {
    content_hash(parts.join("\n").as_bytes())
}

impl Cache {
    /// Opens (creating if needed) the cache at `dir`, or at the directory
    /// named by `RECSEL_CACHE_DIR` when `dir` is None. Returns None when
    /// neither is given: caching is opt-in.
    pub fn open(dir: Option<&Path>) -> Result<Option<Cache>> {
        let dir = match dir {
            Some(d) => d.to_path_buf(),
            None => match std::env::var_os(CACHE_DIR_ENV) {
                Some(d) => PathBuf::from(d),
                None => return Ok(None),
            },
        };
        fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        Ok(Some(Cache { dir }))
    }

    fn entry_path(&self, key: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{key}.{ext}"))
    }

    pub fn get(&self, key: &str, ext: &str) -> Option<Vec<u8>> {
        fs::read(self.entry_path(key, ext)).ok()
    }

    /// Atomic insert: writes to a temp file then renames, so concurrent
    /// readers never observe partial entries.
    pub fn put(&self, key: &str, ext: &str, bytes: &[u8]) -> Result<()> {
        let tmp = self.dir.join(format!(".{key}.{ext}.tmp"));
        fs::write(&tmp, bytes).map_err(|e| Error::io(tmp.display().to_string(), e))?;
        let dst = self.entry_path(key, ext);
        fs::rename(&tmp, &dst).map_err(|e| Error::io(dst.display().to_string(), e))?;
        Ok(())
    }
}
