#[path = "oracle/mod.rs"]
mod oracle;

use evigrid_core::grid::GridSpec;
use evigrid_core::mapio::{point_in_polygon, Polygon};
use evigrid_core::sensor::traverse_cells;
use proptest::prelude::*;

/// Star-shaped polygon: sorted angles around a centre, random radii.
fn star() -> impl Strategy<Value = Vec<[f64; 2]>> {
    (3usize..12)
        .prop_flat_map(|n| (prop::collection::vec(0.0..1.0f64, n), prop::collection::vec(0.5..5.0f64, n)))
        .prop_map(|(mut turns, radii)| {
            turns.sort_by(f64::total_cmp);
            turns
                .iter()
                .zip(&radii)
                .enumerate()
                .map(|(k, (u, r))| {
                    // keep angles strictly increasing
                    let angle = std::f64::consts::TAU * (k as f64 + u) / turns.len() as f64;
                    [r * angle.cos(), r * angle.sin()]
                })
                .collect()
        })
}

fn distance_to_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let e = [b[0] - a[0], b[1] - a[1]];
    let len2 = e[0] * e[0] + e[1] * e[1];
    let u = (((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / len2).clamp(0.0, 1.0);
    ((p[0] - a[0] - u * e[0]).powi(2) + (p[1] - a[1] - u * e[1]).powi(2)).sqrt()
}

/// Does the segment pass through the closed cell, up to `eps`?
fn segment_meets_cell(spec: &GridSpec<f64>, cell: (usize, usize), from: [f64; 2], to: [f64; 2], eps: f64) -> bool {
    let x0 = spec.origin_x + cell.0 as f64 * spec.resolution - eps;
    let y0 = spec.origin_y + cell.1 as f64 * spec.resolution - eps;
    let (x1, y1) = (x0 + spec.resolution + 2.0 * eps, y0 + spec.resolution + 2.0 * eps);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for (p, d, min, max) in [(from[0], to[0] - from[0], x0, x1), (from[1], to[1] - from[1], y0, y1)] {
        if d == 0.0 {
            if p < min || p > max {
                return false;
            }
        } else {
            let (a, b) = ((min - p) / d, (max - p) / d);
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
    }
    lo <= hi
}

proptest! {
    #[test]
    fn containment_agrees_with_winding_number(poly in star(), points in prop::collection::vec(prop::array::uniform2(-6.0..6.0f64), 50)) {
        let polygon = Polygon::new(poly.clone()).unwrap();
        for p in points {
            let n = poly.len();
            let near_edge = (0..n).any(|k| distance_to_segment(p, poly[k], poly[(k + 1) % n]) < 1e-9);
            if near_edge {
                continue;
            }
            prop_assert_eq!(point_in_polygon(p, &polygon), oracle::winding_number(&poly, p[0], p[1]) != 0);
        }
    }

    #[test]
    fn traversal_covers_what_sampling_sees(
        from in prop::array::uniform2(-1.0..11.0f64),
        to in prop::array::uniform2(-1.0..11.0f64),
    ) {
        let spec = GridSpec::new(0.0, 0.0, 0.5, 20, 20).unwrap();
        let cells = traverse_cells(&spec, (from[0], from[1]), (to[0], to[1]));
        let sampled = oracle::supersample_cells([0.0, 0.0], 0.5, [20, 20], from, to, 1e-3);
        for cell in &sampled {
            prop_assert!(cells.contains(cell), "sampled cell {:?} missing", cell);
        }
        for cell in &cells {
            prop_assert!(segment_meets_cell(&spec, *cell, from, to, 1e-9), "cell {:?} off the segment", cell);
        }
        for pair in cells.windows(2) {
            let step = pair[0].0.abs_diff(pair[1].0) + pair[0].1.abs_diff(pair[1].1);
            prop_assert_eq!(step, 1);
        }
        if let Some(end) = spec.world_to_cell(to[0], to[1]) {
            prop_assert_eq!(cells.last(), Some(&end));
        }
    }
}
