//! Grid to PNG rendering with the standard ARC palette, and the inverse.

use std::io::Cursor;

use image::{ImageFormat, Rgb, RgbImage};

use crate::grid::Grid;

/// Pixels per cell used by the pipeline unless configured otherwise.
pub const DEFAULT_CELL_PX: u32 = 16;

/// ARC palette, indexed by color.
pub const PALETTE: [[u8; 3]; 10] = [
    [0x00, 0x00, 0x00], // 0 black
    [0x00, 0x74, 0xD9], // 1 blue
    [0xFF, 0x41, 0x36], // 2 red
    [0x2E, 0xCC, 0x40], // 3 green
    [0xFF, 0xDC, 0x00], // 4 yellow
    [0xAA, 0xAA, 0xAA], // 5 gray
    [0xF0, 0x12, 0xBE], // 6 magenta
    [0xFF, 0x85, 0x1B], // 7 orange
    [0x7F, 0xDB, 0xFF], // 8 azure
    [0x87, 0x0C, 0x25], // 9 maroon
];

pub const COLOR_NAMES: [&str; 10] = [
    "black", "blue", "red", "green", "yellow", "gray", "magenta", "orange", "azure", "maroon",
];

pub fn color_name(color: u8) -> &'static str {
    COLOR_NAMES[color as usize]
}

/// Renders each cell as a `cell_px` square of its palette color.
pub fn render_grid(grid: &Grid, cell_px: u32) -> Vec<u8> {
    assert!(cell_px >= 1, "cell_px must be at least 1");
    let width = grid.cols() as u32 * cell_px;
    let height = grid.rows() as u32 * cell_px;
    let img = RgbImage::from_fn(width, height, |x, y| {
        let color = grid.get((y / cell_px) as usize, (x / cell_px) as usize);
        Rgb(PALETTE[color as usize])
    });
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .expect("encoding an in-memory PNG cannot fail");
    out.into_inner()
}

/// Recovers a grid from a PNG produced by [`render_grid`] at the same
/// `cell_px`. Returns `None` for anything else.
pub fn decode_grid(png: &[u8], cell_px: u32) -> Option<Grid> {
    if cell_px == 0 {
        return None;
    }
    let img = image::load_from_memory_with_format(png, ImageFormat::Png).ok()?.to_rgb8();
    let (w, h) = img.dimensions();
    if w == 0 || h == 0 || w % cell_px != 0 || h % cell_px != 0 {
        return None;
    }
    let rows = (h / cell_px) as usize;
    let cols = (w / cell_px) as usize;
    let mut data = vec![vec![0u8; cols]; rows];
    for (r, row) in data.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let x0 = c as u32 * cell_px;
            let y0 = r as u32 * cell_px;
            let px = img.get_pixel(x0, y0).0;
            let color = PALETTE.iter().position(|p| *p == px)?;
            for dy in 0..cell_px {
                for dx in 0..cell_px {
                    if img.get_pixel(x0 + dx, y0 + dy).0 != px {
                        return None;
                    }
                }
            }
            *cell = color as u8;
        }
    }
    Grid::from_rows(&data).ok()
}
