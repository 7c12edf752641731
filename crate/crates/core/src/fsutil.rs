//! Atomic file writes and JSON-lines helpers.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Writes `bytes` to a sibling temp file and renames it over `path`, so
/// readers see either the old content or the new, never a torn file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(parent)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> std::io::Result<T> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| invalid(path, 0, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> std::io::Result<()> {
    let mut bytes = Vec::new();
    for item in items {
        serde_json::to_writer(&mut bytes, item).map_err(std::io::Error::other)?;
        bytes.push(b'\n');
    }
    write_atomic(path, &bytes)
}

/// Appends one line and flushes it to disk.
pub fn append_jsonl<T: Serialize>(path: &Path, item: &T) -> std::io::Result<()> {
    let mut line = serde_json::to_vec(item).map_err(std::io::Error::other)?;
    line.push(b'\n');
    let mut file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    file.write_all(&line)?;
    file.sync_data()
}

/// Reads every non-blank line. A torn final line (no trailing newline and
/// unparseable) is dropped with a warning, since it can only come from an
/// interrupted append.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> std::io::Result<Vec<T>> {
    let file = std::fs::File::open(path)?;
    let lines: Vec<String> = BufReader::new(file).lines().collect::<Result<_, _>>()?;
    let ends_with_newline = std::fs::read(path)?.last().is_none_or(|b| *b == b'\n');
    let mut out = Vec::with_capacity(lines.len());
    let last = lines.len();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => out.push(v),
            Err(_) if i + 1 == last && !ends_with_newline => {
                log::warn!("{}: dropping incomplete final line", path.display());
            }
            Err(e) => return Err(invalid(path, i + 1, e)),
        }
    }
    Ok(out)
}

fn invalid(path: &Path, line: usize, e: serde_json::Error) -> std::io::Error {
    let at = if line > 0 { format!(" line {line}") } else { String::new() };
    std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}{at}: {e}", path.display()))
}
