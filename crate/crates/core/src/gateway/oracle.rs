//! Oracle-echo transport: decodes the one attached grid image and answers
//! with the oracle description, optionally after seeded corruption.

use serde::{Deserialize, Serialize};

use super::{GatewayError, ModelRequest};
use crate::perception::describe::{corrupt_grid, oracle_text};
use crate::perception::render::{decode_grid, DEFAULT_CELL_PX};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corruption {
    /// Probability that each object is recolored.
    pub rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleOptions {
    pub cell_px: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corruption: Option<Corruption>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            cell_px: DEFAULT_CELL_PX,
            corruption: None,
        }
    }
}

pub(crate) fn answer(request: &ModelRequest, options: &OracleOptions) -> Result<String, GatewayError> {
    let images: Vec<_> = request.images().collect();
    let [image] = images.as_slice() else {
        return Err(GatewayError::OracleInput(format!(
            "expected exactly one image, got {}",
            images.len()
        )));
    };
    let Some(grid) = decode_grid(image.bytes(), options.cell_px) else {
        return Ok(format!("Image {}", image.digest()));
    };
    let grid = match options.corruption {
        Some(c) if c.rate > 0.0 => corrupt_grid(&grid, c.rate, c.seed, image.digest()),
        _ => grid,
    };
    Ok(oracle_text(&grid))
}
