//! Deterministic oracle describer used as a perfect-perception stand-in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::digest::{content_digest, seed_from};
use crate::grid::Grid;
use crate::perception::objects::{extract_objects, Connectivity};
use crate::perception::render::{color_name, render_grid, DEFAULT_CELL_PX};
use crate::perception::text::serialize_grid;
use crate::task::Description;

pub const ORACLE_BACKEND_ID: &str = "oracle";
pub const ORACLE_PROMPT_ID: &str = "oracle-describer-v1";

/// Dimensions, one sentence per object, then the serialized grid.
pub fn oracle_text(grid: &Grid) -> String {
    let mut out = format!("{}x{} grid.", grid.rows(), grid.cols());
    let objects = extract_objects(grid, Connectivity::Four);
    if objects.is_empty() {
        out.push_str(" No objects.");
    }
    for obj in &objects {
        let color = color_name(obj.color);
        let article = if color.starts_with(['a', 'e', 'i', 'o', 'u']) { "An" } else { "A" };
        let plural = if obj.size == 1 { "" } else { "s" };
        out.push_str(&format!(
            " {article} {color} {} ({} cell{plural}) with top-left at row {}, column {}.",
            obj.shape().as_str(),
            obj.size,
            obj.bbox.top,
            obj.bbox.left
        ));
    }
    out.push(' ');
    out.push_str(&serialize_grid(grid));
    out
}

/// Oracle description of a grid as rendered at the default cell size.
pub fn describe_grid_oracle(grid: &Grid) -> Description {
    Description {
        text: oracle_text(grid),
        source_digest: content_digest(&render_grid(grid, DEFAULT_CELL_PX)),
        backend_id: ORACLE_BACKEND_ID.to_string(),
        prompt_id: ORACLE_PROMPT_ID.to_string(),
    }
}

/// Recolors each object with probability `rate`.
///
/// The draw is seeded from `seed` and `salt` (normally the image digest), so
/// the same image always receives the same corruption regardless of which
/// task it appears in or in what order it is described.
pub fn corrupt_grid(grid: &Grid, rate: f64, seed: u64, salt: &str) -> Grid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_from(&[&seed.to_le_bytes(), salt.as_bytes()]));
    let mut out = grid.clone();
    for obj in extract_objects(grid, Connectivity::Four) {
        let draw: f64 = rng.random();
        let offset: u8 = rng.random_range(1..9);
        if draw < rate {
            // Cycle within 1..=9 so the new color always differs.
            let new_color = (obj.color - 1 + offset) % 9 + 1;
            for &(r, c) in &obj.cells {
                out = out.with_cell(r, c, new_color);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    #[test]
    fn empty_grid_template() {
        assert_eq!(oracle_text(&grid(&[&[0, 0], &[0, 0]])), "2x2 grid. No objects. [[0, 0], [0, 0]]");
    }

    #[test]
    fn green_square() {
        let text = oracle_text(&grid(&[&[3, 3], &[3, 3]]));
        assert!(text.contains("green"));
        assert!(text.contains("4 cells"));
        assert!(text.contains("rectangle"));
        assert_eq!(
            text,
            "2x2 grid. A green rectangle (4 cells) with top-left at row 0, column 0. [[3, 3], [3, 3]]"
        );
    }

    #[test]
    fn articles_and_singular() {
        let text = oracle_text(&grid(&[&[7, 0, 8]]));
        assert!(text.contains("An orange single cell (1 cell) with top-left at row 0, column 0."));
        assert!(text.contains("An azure single cell (1 cell) with top-left at row 0, column 2."));
    }

    #[test]
    fn deterministic() {
        let g = grid(&[&[1, 2], &[2, 1]]);
        assert_eq!(describe_grid_oracle(&g), describe_grid_oracle(&g));
    }

    #[test]
    fn corruption_extremes() {
        let g = grid(&[&[1, 0, 2], &[0, 3, 0]]);
        assert_eq!(corrupt_grid(&g, 0.0, 7, "x"), g);
        let all = corrupt_grid(&g, 1.0, 7, "x");
        for (a, b) in g.cells().iter().zip(all.cells()) {
            if *a == 0 {
                assert_eq!(*b, 0);
            } else {
                assert_ne!(a, b);
                assert!((1..=9).contains(b));
            }
        }
    }

    #[test]
    fn corruption_depends_only_on_seed_and_salt() {
        let g = grid(&[&[1, 0, 2, 0, 4], &[0, 3, 0, 5, 0]]);
        assert_eq!(corrupt_grid(&g, 0.5, 3, "img"), corrupt_grid(&g, 0.5, 3, "img"));
    }
}
