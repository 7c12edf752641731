//! Object extraction: maximal same-color connected components of non-zero cells.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Connectivity {
    #[default]
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "8")]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
            Connectivity::Eight => &[(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridObject {
    pub color: u8,
    /// Member cells as `(row, col)`, row-major order.
    pub cells: Vec<(usize, usize)>,
    pub bbox: BBox,
    pub size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeClass {
    SingleCell,
    HorizontalLine,
    VerticalLine,
    Rectangle,
    Irregular,
}

impl ShapeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ShapeClass::SingleCell => "single cell",
            ShapeClass::HorizontalLine => "horizontal line",
            ShapeClass::VerticalLine => "vertical line",
            ShapeClass::Rectangle => "rectangle",
            ShapeClass::Irregular => "irregular shape",
        }
    }
}

impl GridObject {
    pub fn shape(&self) -> ShapeClass {
        let BBox { height, width, .. } = self.bbox;
        if self.size == 1 {
            ShapeClass::SingleCell
        } else if self.size != height * width {
            ShapeClass::Irregular
        } else if height == 1 {
            ShapeClass::HorizontalLine
        } else if width == 1 {
            ShapeClass::VerticalLine
        } else {
            ShapeClass::Rectangle
        }
    }
}

/// Objects sorted by bbox `(top, left)`, then by first member cell.
pub fn extract_objects(grid: &Grid, connectivity: Connectivity) -> Vec<GridObject> {
    let (rows, cols) = (grid.rows(), grid.cols());
    let mut seen = vec![false; rows * cols];
    let mut objects = Vec::new();
    let mut queue = VecDeque::new();
    for r in 0..rows {
        for c in 0..cols {
            let color = grid.get(r, c);
            if color == 0 || seen[r * cols + c] {
                continue;
            }
            seen[r * cols + c] = true;
            queue.push_back((r, c));
            let mut cells = Vec::new();
            while let Some((cr, cc)) = queue.pop_front() {
                cells.push((cr, cc));
                for &(dr, dc) in connectivity.offsets() {
                    let nr = cr as isize + dr;
                    let nc = cc as isize + dc;
                    if nr < 0 || nc < 0 || nr >= rows as isize || nc >= cols as isize {
                        continue;
                    }
                    let (nr, nc) = (nr as usize, nc as usize);
                    if !seen[nr * cols + nc] && grid.get(nr, nc) == color {
                        seen[nr * cols + nc] = true;
                        queue.push_back((nr, nc));
                    }
                }
            }
            cells.sort_unstable();
            objects.push(object_from_cells(color, cells));
        }
    }
    objects.sort_by_key(|o| (o.bbox.top, o.bbox.left, o.cells[0], o.color));
    objects
}

fn object_from_cells(color: u8, cells: Vec<(usize, usize)>) -> GridObject {
    let top = cells.iter().map(|c| c.0).min().unwrap_or(0);
    let bottom = cells.iter().map(|c| c.0).max().unwrap_or(0);
    let left = cells.iter().map(|c| c.1).min().unwrap_or(0);
    let right = cells.iter().map(|c| c.1).max().unwrap_or(0);
    GridObject {
        color,
        size: cells.len(),
        bbox: BBox {
            top,
            left,
            height: bottom - top + 1,
            width: right - left + 1,
        },
        cells,
    }
}
