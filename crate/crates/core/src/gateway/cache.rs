//! Content-addressed response cache keyed by request digest.
//!
//! Entries live in memory and, when a directory is configured, as
//! `{dir}/{digest}.json` files that survive restarts. Files are written to a
//! temporary name and renamed into place, so a crash never leaves a torn entry.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{ModelRequest, ModelResponse, RequestSummary};

/// What is stored on disk for one request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub request_digest: String,
    pub request: RequestSummary,
    pub response: ModelResponse,
}

pub struct ResponseCache {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<String, ModelResponse>>,
}

impl ResponseCache {
    pub fn new(dir: Option<PathBuf>) -> std::io::Result<ResponseCache> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(ResponseCache {
            dir,
            memory: Mutex::new(HashMap::new()),
        })
    }

    pub fn in_memory() -> ResponseCache {
        ResponseCache {
            dir: None,
            memory: Mutex::new(HashMap::new()),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path_for(dir: &Path, digest: &str) -> PathBuf {
        dir.join(format!("{digest}.json"))
    }

    /// The stored response, marked as served from cache with zero attempts.
    pub fn get(&self, digest: &str) -> std::io::Result<Option<ModelResponse>> {
        let mark = |mut r: ModelResponse| {
            r.served_from_cache = true;
            r.attempts = 0;
            r
        };
        if let Some(hit) = self.memory.lock().expect("cache lock").get(digest) {
            return Ok(Some(mark(hit.clone())));
        }
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        let path = Self::path_for(dir, digest);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        let record: CacheRecord = match serde_json::from_slice(&bytes) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {}: {e}", path.display());
                return Ok(None);
            }
        };
        if record.request_digest != digest {
            log::warn!("cache entry {} holds digest {}", path.display(), record.request_digest);
            return Ok(None);
        }
        self.memory
            .lock()
            .expect("cache lock")
            .insert(digest.to_string(), record.response.clone());
        Ok(Some(mark(record.response)))
    }

    pub fn put(&self, request: &ModelRequest, response: &ModelResponse) -> std::io::Result<()> {
        let mut stored = response.clone();
        stored.served_from_cache = false;
        self.memory
            .lock()
            .expect("cache lock")
            .insert(request.digest().to_string(), stored.clone());
        if let Some(dir) = &self.dir {
            let record = CacheRecord {
                request_digest: request.digest().to_string(),
                request: request.summary(),
                response: stored,
            };
            let json = serde_json::to_vec_pretty(&record).map_err(std::io::Error::other)?;
            crate::fsutil::write_atomic(&Self::path_for(dir, request.digest()), &json)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.memory.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
