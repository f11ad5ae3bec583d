//! Inverse sensor model: lidar scan to a world-aligned grid over `{F, O}`.

use serde::{Deserialize, Serialize};

use crate::belief::{dempster_combine, scan, scan_frame, MassFunction};
use crate::error::{Error, Result};
use crate::grid::{EvidentialGrid, GridSpec};
use crate::scalar::Scalar;

/// Planar pose with a timestamp; heading in `(-pi, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose<T> {
    pub x: T,
    pub y: T,
    pub heading: T,
    pub t: T,
}

impl<T: Scalar> Pose<T> {
    pub fn new(x: T, y: T, heading: T, t: T) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
            t,
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle<T: Scalar>(angle: T) -> T {
    let two_pi = T::TAU();
    let mut a = angle % two_pi;
    if a <= -T::PI() {
        a = a + two_pi;
    } else if a > T::PI() {
        a = a - two_pi;
    }
    a
}

/// One lidar return; `range` is `None` when nothing was hit within range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Beam<T> {
    pub bearing: T,
    pub range: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scan<T> {
    pub beams: Vec<Beam<T>>,
    pub max_range: T,
}

impl<T: Scalar> Scan<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_range > T::zero()) {
            return Err(Error::InvalidParameter("scan max range must be positive".into()));
        }
        for pair in self.beams.windows(2) {
            if !(pair[1].bearing > pair[0].bearing) {
                return Err(Error::InvalidParameter("beam bearings must be strictly increasing".into()));
            }
        }
        for beam in &self.beams {
            if let Some(r) = beam.range {
                if !(r > T::zero() && r <= self.max_range) {
                    return Err(Error::InvalidParameter(format!(
                        "hit range {r} outside (0, {}]",
                        self.max_range
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Masses of the two-parameter simple-support sensor model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorModelParams<T> {
    /// Mass on `{O}` in the cell holding the return.
    pub mu_occ: T,
    /// Mass on `{F}` in cells the beam crossed.
    pub mu_free: T,
}

impl<T: Scalar> Default for SensorModelParams<T> {
    fn default() -> Self {
        Self {
            mu_occ: T::lit(0.7),
            mu_free: T::lit(0.4),
        }
    }
}

impl<T: Scalar> SensorModelParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu_occ", self.mu_occ), ("mu_free", self.mu_free)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Cells crossed by the segment `from -> to`, in order, clipped to the grid.
///
/// Amanatides-Woo traversal: each step crosses exactly one cell boundary,
/// so the list is 4-connected and ends in the cell holding `to` when that
/// cell is inside the grid.
pub fn traverse_cells<T: Scalar>(spec: &GridSpec<T>, from: (T, T), to: (T, T)) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    traverse_cells_into(spec, from, to, &mut cells);
    cells
}

pub(crate) fn traverse_cells_into<T: Scalar>(
    spec: &GridSpec<T>,
    from: (T, T),
    to: (T, T),
    cells: &mut Vec<(usize, usize)>,
) {
    cells.clear();
    let (mut i, mut j) = spec.world_to_cell_unbounded(from.0, from.1);
    let (end_i, end_j) = spec.world_to_cell_unbounded(to.0, to.1);
    let dx = to.0 - from.0;
    let dy = to.1 - from.1;
    let res = spec.resolution;

    let axis = |d: T, start: T, origin: T, cell: i64| -> (i64, T, T) {
        if d > T::zero() {
            let boundary = origin + T::lit((cell + 1) as f64) * res;
            (1, (boundary - start) / d, res / d)
        } else if d < T::zero() {
            let boundary = origin + T::lit(cell as f64) * res;
            (-1, (boundary - start) / d, -res / d)
        } else {
            (0, T::infinity(), T::infinity())
        }
    };
    let (step_i, mut t_max_x, t_delta_x) = axis(dx, from.0, spec.origin_x, i);
    let (step_j, mut t_max_y, t_delta_y) = axis(dy, from.1, spec.origin_y, j);

    let mut entered = false;
    loop {
        if spec.contains(i, j) {
            entered = true;
            cells.push((i as usize, j as usize));
        } else if entered {
            // a segment cannot re-enter a convex box
            break;
        }
        let x_done = i == end_i;
        let y_done = j == end_j;
        if x_done && y_done {
            break;
        }
        if !x_done && (y_done || t_max_x < t_max_y) {
            i += step_i;
            t_max_x = t_max_x + t_delta_x;
        } else {
            j += step_j;
            t_max_y = t_max_y + t_delta_y;
        }
    }
}

/// Scan grid plus the cells that received any evidence.
#[derive(Clone, Debug)]
pub struct ScanGridOutput<T: Scalar> {
    pub grid: EvidentialGrid<T>,
    /// Row-major flags, true where at least one beam deposited evidence.
    pub touched: Vec<bool>,
}

/// Builds the scan grid and keeps it.
pub fn build_scan_grid<T: Scalar>(
    scan: &Scan<T>,
    pose: &Pose<T>,
    spec: GridSpec<T>,
    params: &SensorModelParams<T>,
) -> Result<EvidentialGrid<T>> {
    build_scan_grid_with_coverage(scan, pose, spec, params).map(|out| out.grid)
}

/// Cells a beam crosses get `m({F}) = mu_free`; the cell holding a return
/// gets `m({O}) = mu_occ`; the sensor's own cell gets free evidence from no
/// beam. Overlapping evidence is fused with Dempster's rule in beam order.
pub fn build_scan_grid_with_coverage<T: Scalar>(
    scan: &Scan<T>,
    pose: &Pose<T>,
    spec: GridSpec<T>,
    params: &SensorModelParams<T>,
) -> Result<ScanGridOutput<T>> {
    params.validate()?;
    scan.validate()?;
    if spec.world_to_cell(pose.x, pose.y).is_none() {
        return Err(Error::PoseOutsideGrid {
            x: pose.x.to_f64().unwrap_or(f64::NAN),
            y: pose.y.to_f64().unwrap_or(f64::NAN),
        });
    }
    let frame = scan_frame();
    let free = MassFunction::simple_support(&frame, scan::F, params.mu_free)?;
    let occupied = MassFunction::simple_support(&frame, scan::O, params.mu_occ)?;
    let mut grid = EvidentialGrid::vacuous(spec, frame)?;
    let mut touched = vec![false; spec.cell_count()];

    let mut deposit = |grid: &mut EvidentialGrid<T>, cell: (usize, usize), evidence: &MassFunction<T>| -> Result<()> {
        let k = spec.linear_index(cell.0, cell.1);
        let fused = if touched[k] {
            dempster_combine(&grid.mass_at(k), evidence)?
        } else {
            evidence.clone()
        };
        touched[k] = true;
        grid.set_mass_at(k, &fused);
        Ok(())
    };

    let mut cells = Vec::new();
    for beam in &scan.beams {
        let angle = pose.heading + beam.bearing;
        let length = beam.range.unwrap_or(scan.max_range);
        let end = (pose.x + length * angle.cos(), pose.y + length * angle.sin());
        traverse_cells_into(&spec, (pose.x, pose.y), end, &mut cells);
        let hit_cell = match beam.range {
            Some(_) if spec.world_to_cell(end.0, end.1).is_some() => cells.last().copied(),
            _ => None,
        };
        let free_cells = if hit_cell.is_some() { &cells[..cells.len() - 1] } else { &cells[..] };
        for &cell in free_cells.iter().skip(1) {
            deposit(&mut grid, cell, &free)?;
        }
        if let Some(cell) = hit_cell {
            deposit(&mut grid, cell, &occupied)?;
        }
    }
    Ok(ScanGridOutput { grid, touched })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::Subset;

    fn spec() -> GridSpec<f64> {
        GridSpec::new(0.0, 0.0, 0.5, 20, 20).unwrap()
    }

    #[test]
    fn angle_normalization() {
        use std::f64::consts::PI;
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(normalize_angle(0.3), 0.3);
        assert_eq!(Pose::new(0.0, 0.0, -PI, 0.0).heading, PI);
    }

    #[test]
    fn axis_aligned_traversal() {
        let cells = traverse_cells(&spec(), (0.25, 0.25), (2.25, 0.25));
        assert_eq!(cells, vec![(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]);
        let back = traverse_cells(&spec(), (2.25, 0.25), (0.25, 0.25));
        assert_eq!(back, vec![(4, 0), (3, 0), (2, 0), (1, 0), (0, 0)]);
        let vertical = traverse_cells(&spec(), (0.25, 0.25), (0.25, 2.25));
        assert_eq!(vertical.len(), 5);
    }

    #[test]
    fn zero_length_traversal() {
        assert_eq!(traverse_cells(&spec(), (1.3, 1.3), (1.3, 1.3)), vec![(2, 2)]);
    }

    #[test]
    fn traversal_clips_at_grid_edge() {
        let cells = traverse_cells(&spec(), (9.75, 0.25), (20.0, 0.25));
        assert_eq!(cells, vec![(19, 0)]);
        let entering = traverse_cells(&spec(), (-1.0, 0.25), (0.75, 0.25));
        assert_eq!(entering, vec![(0, 0), (1, 0)]);
    }

    fn single_beam(range: Option<f64>) -> Scan<f64> {
        Scan {
            beams: vec![Beam { bearing: 0.0, range }],
            max_range: 3.0,
        }
    }

    #[test]
    fn single_hit_beam() {
        let pose = Pose::new(0.25, 0.25, 0.0, 0.0);
        let params = SensorModelParams::default();
        let out = build_scan_grid_with_coverage(&single_beam(Some(2.0)), &pose, spec(), &params).unwrap();
        let g = &out.grid;
        assert_eq!(g.mass(4, 0).unwrap().get(scan::O), 0.7);
        for i in 1..4 {
            assert_eq!(g.mass(i, 0).unwrap().get(scan::F), 0.4);
        }
        assert!(g.mass(0, 0).unwrap().is_vacuous());
        assert!(g.mass(5, 0).unwrap().is_vacuous());
        assert_eq!(out.touched.iter().filter(|t| **t).count(), 4);
    }

    #[test]
    fn miss_beam_is_all_free() {
        let pose = Pose::new(0.25, 0.25, 0.0, 0.0);
        let g = build_scan_grid(&single_beam(None), &pose, spec(), &SensorModelParams::default()).unwrap();
        for i in 1..=6 {
            assert_eq!(g.mass(i, 0).unwrap().get(scan::F), 0.4);
        }
        for (i, j) in spec().cells() {
            assert_eq!(g.mass(i, j).unwrap().get(scan::O), 0.0);
        }
        assert!(g.mass(7, 0).unwrap().is_vacuous());
    }

    #[test]
    fn two_free_observations() {
        let pose = Pose::new(0.25, 0.25, 0.0, 0.0);
        let scan = Scan {
            beams: vec![Beam { bearing: -0.01, range: None }, Beam { bearing: 0.01, range: None }],
            max_range: 1.0,
        };
        let g = build_scan_grid(&scan, &pose, spec(), &SensorModelParams::default()).unwrap();
        let m = g.mass(1, 0).unwrap();
        assert!((m.get(scan::F) - 0.64).abs() < 1e-12);
        assert!((m.get(scan::OMEGA) - 0.36).abs() < 1e-12);
        assert_eq!(m.get(Subset::EMPTY), 0.0);
    }

    #[test]
    fn pose_outside_grid() {
        let pose = Pose::new(-1.0, 0.25, 0.0, 0.0);
        let err = build_scan_grid(&single_beam(None), &pose, spec(), &SensorModelParams::default()).unwrap_err();
        assert!(matches!(err, Error::PoseOutsideGrid { .. }));
    }

    #[test]
    fn scan_validation() {
        let bad = Scan {
            beams: vec![Beam { bearing: 0.1, range: None }, Beam { bearing: 0.1, range: None }],
            max_range: 1.0,
        };
        assert!(bad.validate().is_err());
        assert!(single_beam(Some(4.0)).validate().is_err());
        assert!(single_beam(Some(0.0)).validate().is_err());
    }
}
