//! Attribution records under a state directory.
//!
//! `attributions.jsonl` holds the current record per (run, task, annotator);
//! every record replaced by a later submission is appended to
//! `attributions.audit.jsonl` first.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::fsutil::{append_jsonl, read_jsonl, write_jsonl};
use crate::task::Verdict;

use super::record::{validate_record, AttributionRecord};
use super::AttributionError;

pub struct AttributionStore {
    current: PathBuf,
    audit: PathBuf,
    writer: Mutex<()>,
}

fn same_key(a: &AttributionRecord, b: &AttributionRecord) -> bool {
    a.run_id == b.run_id && a.task_id == b.task_id && a.config_id == b.config_id && a.annotator == b.annotator
}

impl AttributionStore {
    pub fn new(state_dir: &Path) -> AttributionStore {
        AttributionStore {
            current: state_dir.join("attributions.jsonl"),
            audit: state_dir.join("attributions.audit.jsonl"),
            writer: Mutex::new(()),
        }
    }

    pub fn path(&self) -> &Path {
        &self.current
    }

    fn read(path: &Path) -> Result<Vec<AttributionRecord>, AttributionError> {
        if !path.is_file() {
            return Ok(Vec::new());
        }
        read_jsonl(path).map_err(AttributionError::Io)
    }

    pub fn records(&self) -> Result<Vec<AttributionRecord>, AttributionError> {
        Self::read(&self.current)
    }

    pub fn audit_log(&self) -> Result<Vec<AttributionRecord>, AttributionError> {
        Self::read(&self.audit)
    }

    pub fn records_for_run(&self, run_id: &str) -> Result<Vec<AttributionRecord>, AttributionError> {
        Ok(self.records()?.into_iter().filter(|r| r.run_id == run_id).collect())
    }

    /// Validates and stores `record`, returning it with its version set.
    /// A record with the same key is replaced and kept in the audit log.
    pub fn submit(&self, mut record: AttributionRecord, verdict: &Verdict) -> Result<AttributionRecord, AttributionError> {
        let violations = validate_record(&record, verdict);
        if !violations.is_empty() {
            return Err(AttributionError::Rejected(violations));
        }
        let _guard = self.writer.lock().expect("attribution writer lock");
        if let Some(parent) = self.current.parent() {
            std::fs::create_dir_all(parent).map_err(AttributionError::Io)?;
        }
        let mut all = self.records()?;
        match all.iter().position(|r| same_key(r, &record)) {
            Some(i) => {
                append_jsonl(&self.audit, &all[i]).map_err(AttributionError::Io)?;
                record.version = all[i].version + 1;
                all[i] = record.clone();
                write_jsonl(&self.current, &all).map_err(AttributionError::Io)?;
            }
            None => {
                record.version = 1;
                append_jsonl(&self.current, &record).map_err(AttributionError::Io)?;
            }
        }
        Ok(record)
    }
}
