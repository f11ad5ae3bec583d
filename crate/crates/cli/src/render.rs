//! Binary PGM/PPM renderings of a map grid. Row 0 is the top (largest y).

use evigrid_core::belief::pignistic;
use evigrid_core::Grid64;

use crate::metrics::{decide, TIE};

/// Colour per decision: F, C, N, S, V, tie.
pub const PALETTE: [[u8; 3]; 6] = [
    [255, 255, 255],
    [0, 0, 200],
    [0, 200, 200],
    [0, 200, 0],
    [200, 0, 0],
    [128, 128, 128],
];

fn raster(grid: &Grid64, channels: usize, magic: &str, mut pixel: impl FnMut(usize, usize, &mut Vec<u8>)) -> Vec<u8> {
    let spec = grid.spec();
    let mut out = format!("{magic}\n{} {}\n255\n", spec.width, spec.height).into_bytes();
    out.reserve(spec.cell_count() * channels);
    for row in 0..spec.height {
        let j = spec.height - 1 - row;
        for i in 0..spec.width {
            pixel(i, j, &mut out);
        }
    }
    out
}

/// P6 image coloured by pignistic argmax; ties are gray.
pub fn render_composite(grid: &Grid64) -> Vec<u8> {
    raster(grid, 3, "P6", |i, j, out| {
        let d = decide(grid, i, j);
        out.extend_from_slice(&PALETTE[d.min(TIE)]);
    })
}

/// P5 image of one class's pignistic probability scaled to 0..=255.
pub fn render_class_layer(grid: &Grid64, class: usize) -> Vec<u8> {
    assert!(class < 5, "class index {class} outside the map frame");
    raster(grid, 1, "P5", |i, j, out| {
        let betp = pignistic(&grid.mass(i, j).expect("in bounds")).expect("normalized");
        out.push((255.0 * betp[class]).round().clamp(0.0, 255.0) as u8);
    })
}
