//! Vector maps of buildings and roads, and the prior grid derived from them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::belief::{map, map_frame, MassFunction};
use crate::error::{Error, Result};
use crate::grid::{EvidentialGrid, GridSpec};
use crate::scalar::Scalar;

/// Closed simple polygon; the last vertex connects back to the first.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon<T> {
    vertices: Vec<[T; 2]>,
    bbox: [T; 4],
}

impl<T: Scalar> Polygon<T> {
    pub fn new(vertices: Vec<[T; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!("{} vertices, need at least 3", vertices.len())));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite coordinate".into()));
        }
        let poly = Self {
            bbox: bounding_box(&vertices),
            vertices,
        };
        if poly.signed_area() == T::zero() {
            return Err(Error::InvalidPolygon("zero area".into()));
        }
        if let Some((a, b)) = poly.first_self_intersection() {
            return Err(Error::InvalidPolygon(format!("edges {a} and {b} intersect")));
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: T, y0: T, x1: T, y1: T) -> Result<Self> {
        Self::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    /// `[min_x, min_y, max_x, max_y]`.
    pub fn bbox(&self) -> [T; 4] {
        self.bbox
    }

    pub fn edges(&self) -> impl Iterator<Item = ([T; 2], [T; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    /// Shoelace area, positive for counter-clockwise vertex order.
    pub fn signed_area(&self) -> T {
        let twice = self
            .edges()
            .fold(T::zero(), |acc, (a, b)| acc + (a[0] * b[1] - b[0] * a[1]));
        twice / T::lit(2.0)
    }

    fn first_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        let edges: Vec<_> = self.edges().collect();
        for a in 0..n {
            for b in a + 1..n {
                let adjacent = b == a + 1 || (a == 0 && b == n - 1);
                if adjacent {
                    // neighbours share one vertex; they must not fold back onto each other
                    let (p, q) = if b == a + 1 { (edges[a], edges[b]) } else { (edges[b], edges[a]) };
                    if orientation(p.0, p.1, q.1) == T::zero() && dot(sub(p.0, p.1), sub(q.1, p.1)) > T::zero() {
                        return Some((a, b));
                    }
                } else if segments_intersect(edges[a].0, edges[a].1, edges[b].0, edges[b].1) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Even-odd containment; points on the boundary count as inside.
    pub fn contains(&self, x: T, y: T) -> bool {
        point_in_polygon([x, y], self)
    }
}

fn bounding_box<T: Scalar>(vertices: &[[T; 2]]) -> [T; 4] {
    vertices.iter().fold(
        [T::infinity(), T::infinity(), T::neg_infinity(), T::neg_infinity()],
        |b, v| [b[0].min(v[0]), b[1].min(v[1]), b[2].max(v[0]), b[3].max(v[1])],
    )
}

#[inline]
fn sub<T: Scalar>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn dot<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

/// Twice the signed area of triangle `abc`.
#[inline]
pub(crate) fn orientation<T: Scalar>(a: [T; 2], b: [T; 2], c: [T; 2]) -> T {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment<T: Scalar>(p: [T; 2], a: [T; 2], b: [T; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed segments `ab` and `cd` share at least one point.
pub(crate) fn segments_intersect<T: Scalar>(a: [T; 2], b: [T; 2], c: [T; 2], d: [T; 2]) -> bool {
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);
    let z = T::zero();
    if ((o1 > z && o2 < z) || (o1 < z && o2 > z)) && ((o3 > z && o4 < z) || (o3 < z && o4 > z)) {
        return true;
    }
    (o1 == z && on_segment(c, a, b))
        || (o2 == z && on_segment(d, a, b))
        || (o3 == z && on_segment(a, c, d))
        || (o4 == z && on_segment(b, c, d))
}

/// Ray-crossing containment test with a closed boundary.
pub fn point_in_polygon<T: Scalar>(p: [T; 2], poly: &Polygon<T>) -> bool {
    let [min_x, min_y, max_x, max_y] = poly.bbox;
    if p[0] < min_x || p[0] > max_x || p[1] < min_y || p[1] > max_y {
        return false;
    }
    let mut inside = false;
    for (a, b) in poly.edges() {
        if on_boundary(p, a, b) {
            return true;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x_cross = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn on_boundary<T: Scalar>(p: [T; 2], a: [T; 2], b: [T; 2]) -> bool {
    if !on_segment(p, a, b) {
        return false;
    }
    let edge = sub(b, a);
    let len = dot(edge, edge).sqrt();
    // within a nanometre of the edge line
    orientation(a, b, p).abs() <= T::lit(1e-9) * len
}

/// Building footprints and road surfaces in the local metric frame.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct VectorMap<T> {
    pub buildings: Vec<Polygon<T>>,
    pub roads: Vec<Polygon<T>>,
}

/// On-disk layout: `{"buildings": [[[x, y], ...], ...], "roads": [...]}`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    #[serde(default)]
    pub buildings: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub roads: Vec<Vec<[f64; 2]>>,
}

/// Lattice pitch used when checking that buildings and roads do not overlap.
const OVERLAP_PROBE_PITCH: f64 = 0.25;

impl<T: Scalar> VectorMap<T> {
    pub fn new(buildings: Vec<Polygon<T>>, roads: Vec<Polygon<T>>) -> Result<Self> {
        let map = Self { buildings, roads };
        map.check_disjoint()?;
        Ok(map)
    }

    pub fn from_file(file: &MapFile) -> Result<Self> {
        let convert = |kind: &str, polys: &[Vec<[f64; 2]>]| -> Result<Vec<Polygon<T>>> {
            polys
                .iter()
                .enumerate()
                .map(|(k, vs)| {
                    Polygon::new(vs.iter().map(|v| [T::lit(v[0]), T::lit(v[1])]).collect())
                        .map_err(|e| Error::InvalidMap(format!("{kind} {k}: {e}")))
                })
                .collect()
        };
        Self::new(convert("building", &file.buildings)?, convert("road", &file.roads)?)
    }

    pub fn to_file(&self) -> MapFile {
        let convert = |polys: &[Polygon<T>]| {
            polys
                .iter()
                .map(|p| {
                    p.vertices()
                        .iter()
                        .map(|v| [v[0].to_f64().unwrap_or(f64::NAN), v[1].to_f64().unwrap_or(f64::NAN)])
                        .collect()
                })
                .collect()
        };
        MapFile {
            buildings: convert(&self.buildings),
            roads: convert(&self.roads),
        }
    }

    pub fn in_building(&self, x: T, y: T) -> bool {
        self.buildings.iter().any(|b| b.contains(x, y))
    }

    pub fn on_road(&self, x: T, y: T) -> bool {
        self.roads.iter().any(|r| r.contains(x, y))
    }

    /// Samples a fixed lattice over each overlapping building/road bounding
    /// box pair; no sample may fall inside both.
    fn check_disjoint(&self) -> Result<()> {
        let pitch = T::lit(OVERLAP_PROBE_PITCH);
        let half = T::lit(0.5);
        for (bi, b) in self.buildings.iter().enumerate() {
            for (ri, r) in self.roads.iter().enumerate() {
                let lo_x = b.bbox[0].max(r.bbox[0]);
                let lo_y = b.bbox[1].max(r.bbox[1]);
                let hi_x = b.bbox[2].min(r.bbox[2]);
                let hi_y = b.bbox[3].min(r.bbox[3]);
                if lo_x > hi_x || lo_y > hi_y {
                    continue;
                }
                let i0 = (lo_x / pitch - half).floor().to_i64().unwrap_or(0);
                let i1 = (hi_x / pitch - half).ceil().to_i64().unwrap_or(0);
                let j0 = (lo_y / pitch - half).floor().to_i64().unwrap_or(0);
                let j1 = (hi_y / pitch - half).ceil().to_i64().unwrap_or(0);
                for j in j0..=j1 {
                    for i in i0..=i1 {
                        let x = (T::lit(i as f64) + half) * pitch;
                        let y = (T::lit(j as f64) + half) * pitch;
                        if b.contains(x, y) && r.contains(x, y) {
                            return Err(Error::InvalidMap(format!(
                                "building {bi} overlaps road {ri} near ({x}, {y})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Reads and validates a map JSON file.
pub fn load_map<T: Scalar>(path: impl AsRef<Path>) -> Result<VectorMap<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: MapFile = serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.display().to_string(),
        source,
    })?;
    VectorMap::from_file(&file)
}

/// Confidence in each map context.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorConfidence<T> {
    pub beta_b: T,
    pub beta_r: T,
    pub beta_t: T,
}

impl<T: Scalar> Default for PriorConfidence<T> {
    fn default() -> Self {
        Self {
            beta_b: T::lit(0.9),
            beta_r: T::lit(0.9),
            beta_t: T::lit(0.7),
        }
    }
}

impl<T: Scalar> PriorConfidence<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("beta_b", self.beta_b), ("beta_r", self.beta_r), ("beta_t", self.beta_t)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Context of a point: building first, then road, then anything else.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapContext {
    Building,
    Road,
    Other,
}

pub fn classify_point<T: Scalar>(map: &VectorMap<T>, x: T, y: T) -> MapContext {
    if map.in_building(x, y) {
        MapContext::Building
    } else if map.on_road(x, y) {
        MapContext::Road
    } else {
        MapContext::Other
    }
}

/// Prior mass of one context: `beta` on its focal set, the rest on the frame.
pub fn prior_mass<T: Scalar>(context: MapContext, beta: &PriorConfidence<T>) -> MassFunction<T> {
    let (focal, weight) = match context {
        MapContext::Building => (map::BUILDING, beta.beta_b),
        MapContext::Road => (map::ROAD, beta.beta_r),
        MapContext::Other => (map::OTHER, beta.beta_t),
    };
    MassFunction::simple_support(&map_frame(), focal, weight).expect("validated confidence")
}

/// Classifies every cell by its centre and writes the matching prior mass.
pub fn build_prior_grid<T: Scalar>(
    map: &VectorMap<T>,
    spec: GridSpec<T>,
    beta: &PriorConfidence<T>,
) -> Result<EvidentialGrid<T>> {
    beta.validate()?;
    let mut grid = EvidentialGrid::vacuous(spec, map_frame())?;
    let masses = [
        prior_mass(MapContext::Building, beta),
        prior_mass(MapContext::Road, beta),
        prior_mass(MapContext::Other, beta),
    ];
    for (i, j) in spec.cells() {
        let (x, y) = spec.cell_center_unchecked(i, j);
        let m = match classify_point(map, x, y) {
            MapContext::Building => &masses[0],
            MapContext::Road => &masses[1],
            MapContext::Other => &masses[2],
        };
        grid.set_mass_at(spec.linear_index(i, j), m);
    }
    Ok(grid)
}
