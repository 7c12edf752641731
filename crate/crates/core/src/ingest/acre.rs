//! ACRE episodes.
//!
//! The loader reads `acre.json` at the root:
//!
//! ```json
//! {"episodes": [{"id": "e000",
//!                "demos":   [{"image": "e000/0.png", "label": "activated"}, ...],
//!                "queries": [{"image": "e000/q0.png", "label": "undetermined"}, ...]}]}
//! ```
//!
//! Image paths are relative to the root. Every episode has six demos and
//! four queries, and yields one task per query with id `{episode}_q{i}`.

use std::path::Path;

use serde::Deserialize;
use serde_json::{Map, Value};

use super::{ensure_valid, IngestError};
use crate::task::{BenchmarkKind, Exemplar, ImageRef, Label, Task, TaskInput, TaskOutput};

pub const ACRE_METADATA_FILE: &str = "acre.json";
const DEMOS_PER_EPISODE: usize = 6;
const QUERIES_PER_EPISODE: usize = 4;

#[derive(Deserialize)]
struct Metadata {
    episodes: Vec<Episode>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Deserialize)]
struct Episode {
    id: String,
    demos: Vec<Panel>,
    queries: Vec<Panel>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Deserialize)]
struct Panel {
    image: String,
    label: String,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

pub fn parse_acre_label(s: &str) -> Option<Label> {
    match s.trim().to_ascii_lowercase().as_str() {
        "activated" | "on" => Some(Label::Activated),
        "deactivated" | "off" => Some(Label::Deactivated),
        "undetermined" | "underdetermined" => Some(Label::Undetermined),
        _ => None,
    }
}

pub fn load_acre(root: &Path) -> Result<Vec<Task>, IngestError> {
    let meta_path = root.join(ACRE_METADATA_FILE);
    let text = std::fs::read_to_string(&meta_path).map_err(|e| IngestError::io(&meta_path, e))?;
    let meta: Metadata = serde_json::from_str(&text).map_err(|e| IngestError::Json {
        path: meta_path.clone(),
        message: e.to_string(),
    })?;
    log_extra(&meta_path, "top level", &meta.extra);

    let mut tasks = Vec::new();
    for ep in &meta.episodes {
        log_extra(&meta_path, &format!("episode {}", ep.id), &ep.extra);
        if ep.demos.len() != DEMOS_PER_EPISODE {
            return Err(IngestError::invalid(
                &meta_path,
                format!("episode {}: expected 6 demonstrations, found {}", ep.id, ep.demos.len()),
            ));
        }
        if ep.queries.len() != QUERIES_PER_EPISODE {
            return Err(IngestError::invalid(
                &meta_path,
                format!("episode {}: expected 4 queries, found {}", ep.id, ep.queries.len()),
            ));
        }
        let demos = ep
            .demos
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (image, label) = panel(root, &meta_path, &format!("episode {} demo {i}", ep.id), p)?;
                Ok(Exemplar {
                    input: TaskInput::Image(image),
                    output: TaskOutput::Label(label),
                })
            })
            .collect::<Result<Vec<_>, IngestError>>()?;
        for (q, p) in ep.queries.iter().enumerate() {
            let (image, label) = panel(root, &meta_path, &format!("episode {} query {q}", ep.id), p)?;
            let task = Task::new(
                format!("{}_q{q}", ep.id),
                BenchmarkKind::Acre,
                demos.clone(),
                TaskInput::Image(image),
                TaskOutput::Label(label),
            );
            ensure_valid(&task, &meta_path)?;
            tasks.push(task);
        }
    }
    Ok(tasks)
}

fn panel(root: &Path, meta_path: &Path, location: &str, p: &Panel) -> Result<(ImageRef, Label), IngestError> {
    log_extra(meta_path, location, &p.extra);
    let label = parse_acre_label(&p.label)
        .ok_or_else(|| IngestError::invalid(meta_path, format!("{location}: unknown label `{}`", p.label)))?;
    let image_path = root.join(&p.image);
    if !image_path.is_file() {
        return Err(IngestError::invalid(
            meta_path,
            format!("{location}: missing image file {}", image_path.display()),
        ));
    }
    let image = ImageRef::from_file(&image_path).map_err(|e| IngestError::io(&image_path, e))?;
    Ok((image, label))
}

fn log_extra(path: &Path, location: &str, extra: &Map<String, Value>) {
    for key in extra.keys() {
        log::info!("{}: {location}: ignoring unknown key `{key}`", path.display());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn episode(dir: &Path, id: &str, n_demos: usize, query_labels: [&str; 4]) -> Value {
        std::fs::create_dir_all(dir.join(id)).unwrap();
        let mut demos = Vec::new();
        for i in 0..n_demos {
            let rel = format!("{id}/d{i}.png");
            std::fs::write(dir.join(&rel), format!("demo {id} {i}")).unwrap();
            demos.push(json!({"image": rel, "label": if i % 2 == 0 { "activated" } else { "off" }}));
        }
        let mut queries = Vec::new();
        for (q, label) in query_labels.iter().enumerate() {
            let rel = format!("{id}/q{q}.png");
            std::fs::write(dir.join(&rel), format!("query {id} {q}")).unwrap();
            queries.push(json!({"image": rel, "label": label}));
        }
        json!({"id": id, "demos": demos, "queries": queries, "split": "iid"})
    }

    fn write_meta(dir: &Path, episodes: Vec<Value>) {
        std::fs::write(dir.join(ACRE_METADATA_FILE), json!({"episodes": episodes}).to_string()).unwrap();
    }

    #[test]
    fn one_task_per_query() {
        let dir = tempfile::tempdir().unwrap();
        let ep = episode(dir.path(), "e0", 6, ["activated", "deactivated", "undetermined", "on"]);
        write_meta(dir.path(), vec![ep]);
        let tasks = load_acre(dir.path()).unwrap();
        assert_eq!(tasks.len(), 4);
        assert!(tasks.iter().all(|t| t.demos().len() == 6));
        assert_eq!(tasks[2].id(), "e0_q2");
        assert_eq!(tasks[2].gold().reveal(), &TaskOutput::Label(Label::Undetermined));
        assert_eq!(tasks[0].demos()[1].output, TaskOutput::Label(Label::Deactivated));
    }

    #[test]
    fn five_demos_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let ep = episode(dir.path(), "e0", 5, ["on", "on", "on", "on"]);
        write_meta(dir.path(), vec![ep]);
        assert!(load_acre(dir.path()).unwrap_err().to_string().contains("expected 6 demonstrations"));
    }

    #[test]
    fn unknown_label_and_missing_image() {
        let dir = tempfile::tempdir().unwrap();
        let ep = episode(dir.path(), "e0", 6, ["on", "blinking", "on", "on"]);
        write_meta(dir.path(), vec![ep]);
        assert!(load_acre(dir.path()).unwrap_err().to_string().contains("unknown label `blinking`"));

        let dir = tempfile::tempdir().unwrap();
        let ep = episode(dir.path(), "e1", 6, ["on", "off", "on", "on"]);
        std::fs::remove_file(dir.path().join("e1/d3.png")).unwrap();
        write_meta(dir.path(), vec![ep]);
        assert!(load_acre(dir.path()).unwrap_err().to_string().contains("missing image file"));
    }
}
