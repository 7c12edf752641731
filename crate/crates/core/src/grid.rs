//! Colored integer grids, the Mini-ARC payload.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest row or column count in the ARC family.
pub const MAX_GRID_DIM: usize = 30;
/// Mini-ARC grids are at most 5x5.
pub const MINI_ARC_MAX_DIM: usize = 5;
/// Color indices run 0..=9; 0 is background.
pub const MAX_COLOR: u8 = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid has no rows")]
    Empty,
    #[error("ragged rows: row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("color-index out of range: value {value} at row {row}, col {col}")]
    ColorOutOfRange { row: usize, col: usize, value: i64 },
    #[error("grid is {rows}x{cols}, larger than {max}x{max}")]
    TooLarge { rows: usize, cols: usize, max: usize },
}

/// A rectangular matrix of color indices, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
}

impl Grid {
    /// Validates nested rows of arbitrary integers. Out-of-range values are
    /// rejected with their coordinates, never clamped.
    pub fn from_rows<R, T>(rows: &[R]) -> Result<Grid, GridError>
    where
        R: AsRef<[T]>,
        T: Copy + Into<i64>,
    {
        let first = rows.first().ok_or(GridError::Empty)?.as_ref();
        let cols = first.len();
        if cols == 0 {
            return Err(GridError::Ragged {
                row: 0,
                expected: 1,
                found: 0,
            });
        }
        let mut cells = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(GridError::Ragged {
                    row: r,
                    expected: cols,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                let value: i64 = v.into();
                if !(0..=MAX_COLOR as i64).contains(&value) {
                    return Err(GridError::ColorOutOfRange { row: r, col: c, value });
                }
                cells.push(value as u8);
            }
        }
        if rows.len() > MAX_GRID_DIM || cols > MAX_GRID_DIM {
            return Err(GridError::TooLarge {
                rows: rows.len(),
                cols,
                max: MAX_GRID_DIM,
            });
        }
        Ok(Grid {
            rows: rows.len(),
            cols,
            cells,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Grid, GridError> {
        let data: Vec<Vec<u8>> = (0..rows)
            .map(|r| (0..cols).map(|c| f(r, c)).collect())
            .collect();
        Grid::from_rows(&data)
    }

    pub fn filled(rows: usize, cols: usize, color: u8) -> Result<Grid, GridError> {
        Grid::from_fn(rows, cols, |_, _| color)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Returns a copy with `(row, col)` set to `color`.
    pub fn with_cell(&self, row: usize, col: usize, color: u8) -> Grid {
        assert!(color <= MAX_COLOR, "color {color} out of range");
        let mut out = self.clone();
        out.cells[row * self.cols + col] = color;
        out
    }

    /// Left-right reflection.
    pub fn mirror_horizontal(&self) -> Grid {
        let mut cells = Vec::with_capacity(self.cells.len());
        for r in 0..self.rows {
            cells.extend(self.row(r).iter().rev());
        }
        Grid {
            rows: self.rows,
            cols: self.cols,
            cells,
        }
    }

    /// Clockwise quarter turn; an `r x c` grid becomes `c x r`.
    pub fn rotate90(&self) -> Grid {
        let mut cells = Vec::with_capacity(self.cells.len());
        for r in 0..self.cols {
            for c in 0..self.rows {
                cells.push(self.get(self.rows - 1 - c, r));
            }
        }
        Grid {
            rows: self.cols,
            cols: self.rows,
            cells,
        }
    }

    pub fn map_colors(&self, f: impl Fn(u8) -> u8) -> Grid {
        let cells = self
            .cells
            .iter()
            .map(|&v| {
                let out = f(v);
                assert!(out <= MAX_COLOR, "color {out} out of range");
                out
            })
            .collect();
        Grid {
            rows: self.rows,
            cols: self.cols,
            cells,
        }
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid{:?}", self.to_rows())
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<i64>> = Vec::deserialize(deserializer)?;
        Grid::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    #[test]
    fn rejects_out_of_range_with_coordinates() {
        let err = Grid::from_rows(&[vec![0i64, 12]]).unwrap_err();
        assert_eq!(err, GridError::ColorOutOfRange { row: 0, col: 1, value: 12 });
        assert!(err.to_string().contains("color-index out of range"));
        assert!(Grid::from_rows(&[vec![-1i64]]).is_err());
    }

    #[test]
    fn rejects_ragged_and_empty() {
        assert!(matches!(
            Grid::from_rows(&[vec![1u8, 2], vec![3]]),
            Err(GridError::Ragged { row: 1, .. })
        ));
        assert_eq!(Grid::from_rows::<Vec<u8>, u8>(&[]), Err(GridError::Empty));
        assert!(Grid::from_rows(&[Vec::<u8>::new()]).is_err());
    }

    #[test]
    fn rejects_oversized() {
        let big = vec![vec![0u8; 31]; 2];
        assert!(matches!(Grid::from_rows(&big), Err(GridError::TooLarge { .. })));
        let ok = vec![vec![0u8; 30]; 30];
        assert!(Grid::from_rows(&ok).is_ok());
    }

    #[test]
    fn mirror_flips_columns() {
        assert_eq!(g(&[&[1, 0], &[2, 3]]).mirror_horizontal(), g(&[&[0, 1], &[3, 2]]));
    }

    #[test]
    fn rotate_is_clockwise() {
        let grid = g(&[&[1, 2, 3], &[4, 5, 6]]);
        assert_eq!(grid.rotate90(), g(&[&[4, 1], &[5, 2], &[6, 3]]));
        assert_eq!(grid.rotate90().rotate90().rotate90().rotate90(), grid);
    }

    #[test]
    fn serde_uses_nested_lists() {
        let grid = g(&[&[3, 0], &[0, 3]]);
        let json = serde_json::to_string(&grid).unwrap();
        assert_eq!(json, "[[3,0],[0,3]]");
        let back: Grid = serde_json::from_str(&json).unwrap();
        assert_eq!(back, grid);
        assert!(serde_json::from_str::<Grid>("[[10]]").is_err());
    }
}
