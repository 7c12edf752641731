use std::path::Path;

use serde_json::Value;

use super::{ensure_valid, sorted_entries, IngestError};
use crate::grid::Grid;
use crate::task::{BenchmarkKind, Exemplar, Task, TaskInput, TaskOutput};

const KNOWN_TOP: [&str; 2] = ["train", "test"];

/// One task per `*.json` file under `root` (ARC format), sorted by file
/// name. Demonstrations come from `train`; the first `test` pair supplies
/// the test input and gold output. The task id is the file stem.
pub fn load_miniarc(root: &Path) -> Result<Vec<Task>, IngestError> {
    let mut tasks = Vec::new();
    for path in sorted_entries(root)? {
        if path.extension().and_then(|e| e.to_str()) != Some("json") || !path.is_file() {
            continue;
        }
        tasks.push(load_file(&path)?);
    }
    Ok(tasks)
}

fn load_file(path: &Path) -> Result<Task, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| IngestError::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let obj = doc
        .as_object()
        .ok_or_else(|| IngestError::invalid(path, "top level must be an object"))?;
    for key in obj.keys().filter(|k| !KNOWN_TOP.contains(&k.as_str())) {
        log::info!("{}: ignoring unknown key `{key}`", path.display());
    }
    let pairs = |key: &str| -> Result<Vec<(Grid, Grid)>, IngestError> {
        let list = obj
            .get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| IngestError::invalid(path, format!("missing `{key}` list")))?;
        list.iter()
            .enumerate()
            .map(|(i, pair)| {
                let at = |side: &str| format!("{key}[{i}].{side}");
                let input = grid_at(path, pair.get("input"), &at("input"))?;
                let output = grid_at(path, pair.get("output"), &at("output"))?;
                Ok((input, output))
            })
            .collect()
    };
    let train = pairs("train")?;
    let test = pairs("test")?;
    let (test_input, gold) = test
        .into_iter()
        .next()
        .ok_or_else(|| IngestError::invalid(path, "`test` list is empty"))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let demos = train
        .into_iter()
        .map(|(i, o)| Exemplar {
            input: TaskInput::Grid(i),
            output: TaskOutput::Grid(o),
        })
        .collect();
    let task = Task::new(id, BenchmarkKind::MiniArc, demos, TaskInput::Grid(test_input), TaskOutput::Grid(gold));
    ensure_valid(&task, path)?;
    Ok(task)
}

fn grid_at(path: &Path, value: Option<&Value>, location: &str) -> Result<Grid, IngestError> {
    let rows = value
        .and_then(Value::as_array)
        .ok_or_else(|| IngestError::invalid(path, format!("{location}: expected a list of rows")))?;
    let mut parsed: Vec<Vec<i64>> = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let cells = row
            .as_array()
            .ok_or_else(|| IngestError::invalid(path, format!("{location}: row {r} is not a list")))?;
        let mut out = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let v = cell.as_i64().ok_or_else(|| {
                IngestError::invalid(path, format!("{location}: cell at row {r}, col {c} is not an integer"))
            })?;
            out.push(v);
        }
        parsed.push(out);
    }
    Grid::from_rows(&parsed).map_err(|e| IngestError::invalid(path, format!("{location}: {e}")))
}
