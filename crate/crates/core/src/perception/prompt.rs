//! Uniform per-benchmark perception prompts.
//!
//! A template may use only `{image}` (exactly once) and `{benchmark_notes}`.
//! The prompt id embeds a digest of the template text, so editing a
//! template changes the id and invalidates cached responses.

use thiserror::Error;

use crate::digest::content_digest;
use crate::gateway::{ImagePart, Message, Part};
use crate::task::BenchmarkKind;

const MINIARC_TEMPLATE: &str = include_str!("../../prompts/perception-miniarc.v1.txt");
const ACRE_TEMPLATE: &str = include_str!("../../prompts/perception-acre.v1.txt");
const BONGARD_TEMPLATE: &str = include_str!("../../prompts/perception-bongard.v1.txt");

const MINIARC_NOTES: &str = "Color indices: 0 black (background), 1 blue, 2 red, 3 green, 4 yellow, 5 gray, 6 magenta, 7 orange, 8 azure, 9 maroon.";
const ACRE_NOTES: &str = "Objects are simple solids such as cubes, spheres, and cylinders made of rubber or metal.";
const BONGARD_NOTES: &str = "Drawings are made of pen strokes on a white background.";

pub const PLACEHOLDER_IMAGE: &str = "{image}";
pub const PLACEHOLDER_NOTES: &str = "{benchmark_notes}";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template must contain {{image}} exactly once, found {0}")]
    ImageCount(usize),
    #[error("template uses undeclared placeholder `{0}`")]
    UnknownPlaceholder(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerceptionPromptSpec {
    pub benchmark: BenchmarkKind,
    pub prompt_id: String,
    template: String,
    notes: String,
}

impl PerceptionPromptSpec {
    /// The shipped template for `benchmark`.
    pub fn for_benchmark(benchmark: BenchmarkKind) -> PerceptionPromptSpec {
        let (template, notes) = match benchmark {
            BenchmarkKind::MiniArc => (MINIARC_TEMPLATE, MINIARC_NOTES),
            BenchmarkKind::Acre => (ACRE_TEMPLATE, ACRE_NOTES),
            BenchmarkKind::BongardLogo => (BONGARD_TEMPLATE, BONGARD_NOTES),
        };
        PerceptionPromptSpec::from_template(benchmark, "v1", template, notes).expect("shipped templates are valid")
    }

    pub fn from_template(
        benchmark: BenchmarkKind,
        version: &str,
        template: &str,
        notes: &str,
    ) -> Result<PerceptionPromptSpec, TemplateError> {
        check_placeholders(template)?;
        let digest = content_digest(format!("{template}\u{0}{notes}").as_bytes());
        Ok(PerceptionPromptSpec {
            benchmark,
            prompt_id: format!("{benchmark}-perception-{version}-{}", &digest[..8]),
            template: template.to_string(),
            notes: notes.to_string(),
        })
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    /// One user message holding the template text with `image` at the
    /// `{image}` position. Nothing else about the task is included.
    pub fn messages(&self, image: ImagePart) -> Vec<Message> {
        let text = self.template.replace(PLACEHOLDER_NOTES, &self.notes);
        let (before, after) = text
            .split_once(PLACEHOLDER_IMAGE)
            .expect("checked at construction");
        let mut parts = Vec::with_capacity(3);
        if !before.trim().is_empty() {
            parts.push(Part::Text(before.trim_end().to_string()));
        }
        parts.push(Part::Image(image));
        if !after.trim().is_empty() {
            parts.push(Part::Text(after.trim().to_string()));
        }
        vec![Message::user(parts)]
    }
}

fn check_placeholders(template: &str) -> Result<(), TemplateError> {
    let images = template.matches(PLACEHOLDER_IMAGE).count();
    if images != 1 {
        return Err(TemplateError::ImageCount(images));
    }
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let tail = &rest[open..];
        let close = tail.find('}').map(|i| i + 1).unwrap_or(tail.len());
        let token = &tail[..close];
        if token != PLACEHOLDER_IMAGE && token != PLACEHOLDER_NOTES {
            return Err(TemplateError::UnknownPlaceholder(token.to_string()));
        }
        rest = &tail[close..];
    }
    Ok(())
}
