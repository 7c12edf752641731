//! Deterministic backend answering from a digest-keyed table.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BackendConfig;

/// Request digest to response text. Serializes as a plain JSON object.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScriptTable {
    entries: BTreeMap<String, String>,
}

impl ScriptTable {
    /// Later inserts for the same digest replace earlier ones.
    pub fn insert(&mut self, digest: impl Into<String>, text: impl Into<String>) {
        self.entries.insert(digest.into(), text.into());
    }

    pub fn get(&self, digest: &str) -> Option<&str> {
        self.entries.get(digest).map(String::as_str)
    }

    pub fn extend(&mut self, other: &ScriptTable) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn load(path: &Path) -> std::io::Result<ScriptTable> {
        let bytes = std::fs::read(path)?;
        serde_json::from_slice(&bytes).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let json = serde_json::to_vec_pretty(self).map_err(std::io::Error::other)?;
        crate::fsutil::write_atomic(path, &json)
    }
}

/// Config for a scripted backend named `scripted` serving `table`.
pub fn register_script(table: ScriptTable) -> BackendConfig {
    BackendConfig::scripted("scripted", table)
}
