//! Everything between a raw task item and its text description: rendering,
//! object extraction, the oracle describer, prompts and task enrichment.

pub mod describe;
pub mod enrich;
pub mod objects;
pub mod prompt;
pub mod render;
pub mod text;

use crate::gateway::ImagePart;
use crate::task::{TaskInput, TaskOutput};

/// The image a model sees for a task input: rendered grids or the file bytes.
pub fn input_image(input: &TaskInput, cell_px: u32) -> std::io::Result<ImagePart> {
    match input {
        TaskInput::Grid(g) => Ok(ImagePart::png(render::render_grid(g, cell_px))),
        TaskInput::Image(r) => Ok(ImagePart::new(r.read_bytes()?, r.media_type.clone())),
    }
}

/// The image for a demonstration output, or `None` for labels.
pub fn output_image(output: &TaskOutput, cell_px: u32) -> Option<ImagePart> {
    match output {
        TaskOutput::Grid(g) => Some(ImagePart::png(render::render_grid(g, cell_px))),
        TaskOutput::Label(_) => None,
    }
}
