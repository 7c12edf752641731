//! Bongard-LOGO problems.
//!
//! Two directory layouts are accepted for each problem directory:
//!
//! * `positive/`, `negative/`, `test/positive/`, `test/negative/`: explicit
//!   exemplar sets and held-out test images.
//! * `1/` (positive) and `0/` (negative), as in the public release: the last
//!   image of each set (by file name) is held out as a test image.
//!
//! Problem directories are found by walking the root; the problem id is the
//! directory name. Each test image becomes its own task.

use std::path::{Path, PathBuf};

use super::{ensure_valid, is_image_file, sorted_entries, IngestError};
use crate::task::{BenchmarkKind, Exemplar, ImageRef, Label, Task, TaskInput, TaskOutput};

struct ProblemFiles {
    positives: Vec<PathBuf>,
    negatives: Vec<PathBuf>,
    test_positive: Vec<PathBuf>,
    test_negative: Vec<PathBuf>,
}

pub fn load_bongard(root: &Path) -> Result<Vec<Task>, IngestError> {
    let mut problems = Vec::new();
    find_problems(root, &mut problems)?;
    if problems.is_empty() {
        return Err(IngestError::invalid(root, "no Bongard problem directories found"));
    }
    let mut tasks = Vec::new();
    for dir in problems {
        tasks.extend(load_problem(&dir)?);
    }
    Ok(tasks)
}

fn is_problem_dir(dir: &Path) -> bool {
    ["positive", "negative", "0", "1"].iter().any(|s| dir.join(s).is_dir())
}

fn find_problems(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), IngestError> {
    if is_problem_dir(dir) {
        out.push(dir.to_path_buf());
        return Ok(());
    }
    for entry in sorted_entries(dir)? {
        if entry.is_dir() {
            find_problems(&entry, out)?;
        }
    }
    Ok(())
}

fn images_in(dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    Ok(sorted_entries(dir)?.into_iter().filter(|p| is_image_file(p)).collect())
}

fn collect(dir: &Path) -> Result<ProblemFiles, IngestError> {
    if dir.join("positive").is_dir() || dir.join("negative").is_dir() {
        return Ok(ProblemFiles {
            positives: images_in(&dir.join("positive"))?,
            negatives: images_in(&dir.join("negative"))?,
            test_positive: images_in(&dir.join("test").join("positive"))?,
            test_negative: images_in(&dir.join("test").join("negative"))?,
        });
    }
    let mut positives = images_in(&dir.join("1"))?;
    let mut negatives = images_in(&dir.join("0"))?;
    if positives.len() < 2 || negatives.len() < 2 {
        return Err(IngestError::invalid(
            dir,
            format!(
                "sets 1/ and 0/ need at least two images each to hold one out, found {} and {}",
                positives.len(),
                negatives.len()
            ),
        ));
    }
    let test_positive = positives.pop().into_iter().collect();
    let test_negative = negatives.pop().into_iter().collect();
    Ok(ProblemFiles {
        positives,
        negatives,
        test_positive,
        test_negative,
    })
}

fn load_problem(dir: &Path) -> Result<Vec<Task>, IngestError> {
    let files = collect(dir)?;
    if files.positives.is_empty() {
        return Err(IngestError::invalid(dir, "positive set is empty or missing"));
    }
    if files.negatives.is_empty() {
        return Err(IngestError::invalid(dir, "negative set is empty or missing"));
    }
    if files.test_positive.is_empty() && files.test_negative.is_empty() {
        return Err(IngestError::invalid(dir, "no held-out test images"));
    }
    let image = |p: &Path| ImageRef::from_file(p).map_err(|e| IngestError::io(p, e));
    let mut demos = Vec::with_capacity(files.positives.len() + files.negatives.len());
    for (set, label) in [(&files.positives, Label::Positive), (&files.negatives, Label::Negative)] {
        for p in set {
            demos.push(Exemplar {
                input: TaskInput::Image(image(p)?),
                output: TaskOutput::Label(label),
            });
        }
    }
    let problem_id = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut tasks = Vec::new();
    for (set, label, tag) in [
        (&files.test_positive, Label::Positive, "pos"),
        (&files.test_negative, Label::Negative, "neg"),
    ] {
        for (i, p) in set.iter().enumerate() {
            let task = Task::new(
                format!("{problem_id}_{tag}{i}"),
                BenchmarkKind::BongardLogo,
                demos.clone(),
                TaskInput::Image(image(p)?),
                TaskOutput::Label(label),
            );
            ensure_valid(&task, dir)?;
            tasks.push(task);
        }
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fill(dir: &Path, n: usize, tag: &str) {
        std::fs::create_dir_all(dir).unwrap();
        for i in 0..n {
            std::fs::write(dir.join(format!("{i}.png")), format!("{tag}{i}")).unwrap();
        }
    }

    #[test]
    fn native_layout_holds_out_last_image() {
        let root = tempfile::tempdir().unwrap();
        let p = root.path().join("hd").join("images").join("hd_0001");
        fill(&p.join("1"), 7, "p");
        fill(&p.join("0"), 7, "n");
        let tasks = load_bongard(root.path()).unwrap();
        assert_eq!(tasks.len(), 2);
        assert_eq!(tasks[0].id(), "hd_0001_pos0");
        assert_eq!(tasks[0].demos().len(), 12);
        assert_eq!(tasks[1].gold().reveal(), &TaskOutput::Label(Label::Negative));
    }

    #[test]
    fn missing_negative_set_is_an_error() {
        let root = tempfile::tempdir().unwrap();
        let p = root.path().join("prob");
        fill(&p.join("positive"), 6, "p");
        fill(&p.join("test").join("positive"), 1, "t");
        assert!(load_bongard(root.path()).unwrap_err().to_string().contains("negative set"));
    }
}
