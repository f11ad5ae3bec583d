//! Synthetic urban scenarios: trajectories, a 2D raycast lidar and per-cell
//! ground truth.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::mapio::{MapFile, Polygon, VectorMap};
use crate::sensor::{normalize_angle, Beam, Pose, Scan};

/// Objects slower than this are labelled stopped, in m/s.
pub const STOPPED_SPEED_THRESHOLD: f64 = 0.5;

/// Range noise is clipped to this many standard deviations.
pub const NOISE_CLIP_SIGMAS: f64 = 4.0;

/// Ground-truth class of a cell, indexed like the map frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Label {
    Free = 0,
    Mapped = 1,
    Unmapped = 2,
    Stopped = 3,
    Moving = 4,
}

impl Label {
    pub const ALL: [Label; 5] = [Label::Free, Label::Mapped, Label::Unmapped, Label::Stopped, Label::Moving];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn short_name(self) -> &'static str {
        crate::belief::map::LABELS[self.index()]
    }
}

/// Timestamped poses, strictly increasing in time.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    waypoints: Vec<Pose<f64>>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Pose<f64>>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::InvalidScenario("trajectory without waypoints".into()));
        }
        if waypoints.iter().any(|w| ![w.t, w.x, w.y, w.heading].iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidScenario("non-finite waypoint".into()));
        }
        if waypoints.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidScenario("waypoint times must be strictly increasing".into()));
        }
        Ok(Self { waypoints })
    }

    pub fn waypoints(&self) -> &[Pose<f64>] {
        &self.waypoints
    }

    pub fn start(&self) -> f64 {
        self.waypoints[0].t
    }

    pub fn end(&self) -> f64 {
        self.waypoints[self.waypoints.len() - 1].t
    }

    /// Interpolated pose and chord speed of the bracketing segment, or
    /// `None` outside the waypoint span. A single waypoint holds forever
    /// at speed zero.
    pub fn sample(&self, t: f64) -> Option<(Pose<f64>, f64)> {
        let w = &self.waypoints;
        if w.len() == 1 {
            return Some((Pose { t, ..w[0] }, 0.0));
        }
        if t < self.start() || t > self.end() {
            return None;
        }
        let k = w.partition_point(|p| p.t <= t).clamp(1, w.len() - 1) - 1;
        let (a, b) = (&w[k], &w[k + 1]);
        let dt = b.t - a.t;
        let s = (t - a.t) / dt;
        let dheading = normalize_angle(b.heading - a.heading);
        let pose = Pose::new(
            a.x + s * (b.x - a.x),
            a.y + s * (b.y - a.y),
            a.heading + s * dheading,
            t,
        );
        let pose = if s == 0.0 { Pose { t, ..*a } } else { pose };
        let speed = (b.x - a.x).hypot(b.y - a.y) / dt;
        Some((pose, speed))
    }
}

/// A rectangular object following a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicObject {
    pub length: f64,
    pub width: f64,
    pub trajectory: Trajectory,
}

impl DynamicObject {
    pub fn new(length: f64, width: f64, trajectory: Trajectory) -> Result<Self> {
        if !(length > 0.0 && width > 0.0) {
            return Err(Error::InvalidScenario("object footprint must be positive".into()));
        }
        Ok(Self {
            length,
            width,
            trajectory,
        })
    }

    /// Corners of the footprint centred on `pose`, length along the heading.
    pub fn footprint_at(&self, pose: &Pose<f64>) -> [[f64; 2]; 4] {
        let (s, c) = pose.heading.sin_cos();
        let hl = self.length / 2.0;
        let hw = self.width / 2.0;
        [[-hl, -hw], [hl, -hw], [hl, hw], [-hl, hw]].map(|[u, v]| [pose.x + u * c - v * s, pose.y + u * s + v * c])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LidarConfig {
    pub beams: usize,
    /// Field of view in radians, centred on the heading.
    pub fov: f64,
    pub max_range: f64,
    /// Range noise standard deviation in metres.
    pub sigma: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            beams: 800,
            fov: std::f64::consts::PI,
            max_range: 50.0,
            sigma: 0.02,
        }
    }
}

impl LidarConfig {
    /// Beam bearings evenly spanning the field of view, ends included.
    pub fn bearings(&self) -> Vec<f64> {
        if self.beams == 1 {
            return vec![0.0];
        }
        let last = (self.beams - 1) as f64;
        (0..self.beams).map(|k| self.fov * (k as f64 / last - 0.5)).collect()
    }
}

/// A complete synthetic scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub map: VectorMap<f64>,
    /// Infrastructure absent from the map.
    pub unmapped_obstacles: Vec<Polygon<f64>>,
    pub objects: Vec<DynamicObject>,
    pub ego: Trajectory,
    pub lidar: LidarConfig,
    pub duration: f64,
    pub frame_rate: f64,
    pub rng_seed: u64,
    /// Grid suggested by the scenario file, if any.
    pub grid: Option<GridSpec<f64>>,
}

/// Pose and speed of an object at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectState {
    pub pose: Pose<f64>,
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    pub ego: Pose<f64>,
    /// One entry per scenario object; `None` while outside its time span.
    pub objects: Vec<Option<ObjectState>>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.frame_rate > 0.0) || !self.frame_rate.is_finite() {
            return Err(Error::InvalidScenario("frame_rate must be positive".into()));
        }
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidScenario("duration must be nonnegative".into()));
        }
        if self.ego.waypoints.len() > 1 && (self.ego.start() > 0.0 || self.ego.end() < self.duration) {
            return Err(Error::InvalidScenario(format!(
                "ego waypoints cover [{}, {}], need [0, {}]",
                self.ego.start(),
                self.ego.end(),
                self.duration
            )));
        }
        let l = &self.lidar;
        if l.beams == 0 || !(l.fov > 0.0) || !(l.max_range > 0.0) || !(l.sigma >= 0.0) {
            return Err(Error::InvalidScenario("lidar needs beams > 0, fov > 0, max_range > 0, sigma >= 0".into()));
        }
        if l.beams > 1 && l.fov >= std::f64::consts::TAU {
            return Err(Error::InvalidScenario("fov must be below a full turn".into()));
        }
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        Ok(())
    }

    /// Frames at `t = k / frame_rate` covering `[0, duration]`.
    pub fn frame_count(&self) -> usize {
        (self.duration * self.frame_rate + 1e-9).floor() as usize + 1
    }

    pub fn frame_time(&self, frame: usize) -> f64 {
        frame as f64 / self.frame_rate
    }

    pub fn poses_at(&self, t: f64) -> Result<WorldState> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                duration: self.duration,
            });
        }
        let (ego, _) = self.ego.sample(t).ok_or_else(|| {
            Error::InvalidScenario(format!("ego trajectory undefined at t = {t}"))
        })?;
        let objects = self
            .objects
            .iter()
            .map(|o| o.trajectory.sample(t).map(|(pose, speed)| ObjectState { pose, speed }))
            .collect();
        Ok(WorldState { ego, objects })
    }

    /// Obstacle outlines present at time `t`, as closed vertex rings.
    fn outlines_at(&self, state: &WorldState) -> Vec<Vec<[f64; 2]>> {
        let mut rings: Vec<Vec<[f64; 2]>> = self
            .map
            .buildings
            .iter()
            .chain(&self.unmapped_obstacles)
            .map(|p| p.vertices().to_vec())
            .collect();
        for (object, state) in self.objects.iter().zip(&state.objects) {
            if let Some(s) = state {
                rings.push(object.footprint_at(&s.pose).to_vec());
            }
        }
        rings
    }

    /// Noise-free distance to the nearest obstacle along each beam.
    pub fn true_ranges(&self, t: f64) -> Result<Vec<Option<f64>>> {
        let state = self.poses_at(t)?;
        let segments = ring_segments(&self.outlines_at(&state));
        Ok(self
            .lidar
            .bearings()
            .iter()
            .map(|b| {
                let angle = state.ego.heading + b;
                nearest_hit([state.ego.x, state.ego.y], [angle.cos(), angle.sin()], &segments)
                    .filter(|r| *r <= self.lidar.max_range)
            })
            .collect())
    }

    /// Simulated lidar sweep at time `t`.
    ///
    /// Each beam draws one Gaussian sample from a stream keyed by the seed
    /// and the frame index, so frames are reproducible in any order.
    pub fn generate_scan(&self, t: f64) -> Result<Scan<f64>> {
        let ranges = self.true_ranges(t)?;
        let frame = (t * self.frame_rate).round() as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(frame);
        let sigma = self.lidar.sigma;
        let normal = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
        let clip = NOISE_CLIP_SIGMAS * sigma;
        let beams = self
            .lidar
            .bearings()
            .into_iter()
            .zip(ranges)
            .map(|(bearing, range)| {
                let noise = if sigma > 0.0 {
                    normal.sample(&mut rng).clamp(-clip, clip)
                } else {
                    0.0
                };
                let range = range.map(|r| (r + noise).clamp(1e-6, self.lidar.max_range));
                Beam { bearing, range }
            })
            .collect();
        Ok(Scan {
            beams,
            max_range: self.lidar.max_range,
        })
    }

    /// Label of every cell centre at time `t`, row-major.
    pub fn ground_truth_grid(&self, t: f64, spec: &GridSpec<f64>) -> Result<Vec<Label>> {
        let state = self.poses_at(t)?;
        let footprints: Vec<(Polygon<f64>, f64)> = self
            .objects
            .iter()
            .zip(&state.objects)
            .filter_map(|(o, s)| {
                s.as_ref()
                    .map(|s| (Polygon::new(o.footprint_at(&s.pose).to_vec()).expect("rectangle"), s.speed))
            })
            .collect();
        Ok(spec
            .cells()
            .map(|(i, j)| {
                let (x, y) = spec.cell_center(i, j).expect("in bounds");
                if self.map.in_building(x, y) {
                    Label::Mapped
                } else if self.unmapped_obstacles.iter().any(|p| p.contains(x, y)) {
                    Label::Unmapped
                } else if let Some((_, speed)) = footprints.iter().find(|(p, _)| p.contains(x, y)) {
                    if *speed >= STOPPED_SPEED_THRESHOLD {
                        Label::Moving
                    } else {
                        Label::Stopped
                    }
                } else {
                    Label::Free
                }
            })
            .collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let file: ScenarioFile = serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_file(&file, path.parent())
    }

    /// Builds a scenario; a map given by path resolves against `base_dir`.
    pub fn from_file(file: &ScenarioFile, base_dir: Option<&Path>) -> Result<Self> {
        let map = match &file.map {
            MapSource::Inline(m) => VectorMap::from_file(m)?,
            MapSource::Path(p) => {
                let path = base_dir.map(|d| d.join(p)).unwrap_or_else(|| PathBuf::from(p));
                crate::mapio::load_map(path)?
            }
        };
        let unmapped_obstacles = file
            .unmapped_obstacles
            .iter()
            .map(|vs| Polygon::new(vs.clone()))
            .collect::<Result<Vec<_>>>()?;
        let objects = file
            .objects
            .iter()
            .map(|o| DynamicObject::new(o.footprint[0], o.footprint[1], trajectory(&o.waypoints)?))
            .collect::<Result<Vec<_>>>()?;
        let scenario = Self {
            map,
            unmapped_obstacles,
            objects,
            ego: trajectory(file.ego.waypoints())?,
            lidar: file.lidar,
            duration: file.duration,
            frame_rate: file.frame_rate,
            rng_seed: file.rng_seed,
            grid: file.grid,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

fn trajectory(waypoints: &[[f64; 4]]) -> Result<Trajectory> {
    Trajectory::new(waypoints.iter().map(|w| Pose::new(w[1], w[2], w[3], w[0])).collect())
}

fn ring_segments(rings: &[Vec<[f64; 2]>]) -> Vec<([f64; 2], [f64; 2])> {
    rings
        .iter()
        .flat_map(|r| (0..r.len()).map(move |k| (r[k], r[(k + 1) % r.len()])))
        .collect()
}

/// Smallest positive ray parameter at which `origin + t * dir` meets a
/// segment. `dir` must be a unit vector, so the parameter is a distance.
pub fn nearest_hit(origin: [f64; 2], dir: [f64; 2], segments: &[([f64; 2], [f64; 2])]) -> Option<f64> {
    segments
        .iter()
        .filter_map(|(a, b)| ray_segment(origin, dir, *a, *b))
        .fold(None, |best: Option<f64>, t| Some(best.map_or(t, |b| b.min(t))))
}

fn ray_segment(origin: [f64; 2], dir: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Option<f64> {
    let e = [b[0] - a[0], b[1] - a[1]];
    let denom = dir[0] * e[1] - dir[1] * e[0];
    if denom == 0.0 {
        return None;
    }
    let w = [a[0] - origin[0], a[1] - origin[1]];
    let t = (w[0] * e[1] - w[1] * e[0]) / denom;
    let u = (w[0] * dir[1] - w[1] * dir[0]) / denom;
    (t > 0.0 && (0.0..=1.0).contains(&u)).then_some(t)
}

/// Map reference inside a scenario file: inline or a path.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSource {
    Path(String),
    Inline(MapFile),
}

impl Default for MapSource {
    fn default() -> Self {
        MapSource::Inline(MapFile::default())
    }
}

/// Ego motion, as `{"waypoints": [...]}` or a bare waypoint list.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EgoFile {
    Object { waypoints: Vec<[f64; 4]> },
    List(Vec<[f64; 4]>),
}

impl EgoFile {
    pub fn waypoints(&self) -> &[[f64; 4]] {
        match self {
            EgoFile::Object { waypoints } | EgoFile::List(waypoints) => waypoints,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObjectFile {
    /// `[length, width]` in metres.
    pub footprint: [f64; 2],
    /// `[t, x, y, heading]` rows.
    pub waypoints: Vec<[f64; 4]>,
}

/// On-disk scenario layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub map: MapSource,
    #[serde(default)]
    pub unmapped_obstacles: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub objects: Vec<ObjectFile>,
    pub ego: EgoFile,
    #[serde(default)]
    pub lidar: LidarConfig,
    pub duration: f64,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub grid: Option<GridSpec<f64>>,
}

fn default_frame_rate() -> f64 {
    10.0
}
