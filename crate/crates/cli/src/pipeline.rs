//! Frame loop: scan, scan grid, fusion, outputs and metrics.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use anyhow::Context;
use evigrid_core::belief::map_frame;
use evigrid_core::fusion::fuse_step_in_place;
use evigrid_core::grid::EvidentialGrid;
use evigrid_core::mapio::build_prior_grid;
use evigrid_core::sensor::build_scan_grid_with_coverage;
use evigrid_core::sim::{Label, Scenario};
use evigrid_core::{FusionParams64, Grid64, GridSpec64};

use crate::config::RunConfig;
use crate::metrics::{confusion, decisions, EvalReport, FrameMetrics};
use crate::render::{render_class_layer, render_composite};

/// Temporal fusion state for one scenario.
pub struct Pipeline {
    scenario: Scenario,
    params: FusionParams64,
    prior: Grid64,
    map: Grid64,
    observed: Vec<bool>,
}

/// What one frame produced besides the updated map grid.
pub struct FrameStep {
    pub frame: usize,
    pub t: f64,
    pub scan_grid: Grid64,
    /// Cells that received evidence in this frame.
    pub touched: Vec<bool>,
}

impl Pipeline {
    /// Builds the prior grid once and starts from a vacuous map grid.
    pub fn new(scenario: Scenario, params: FusionParams64, spec: GridSpec64) -> evigrid_core::Result<Self> {
        let prior = build_prior_grid(&scenario.map, spec, &params.prior)?;
        let map = EvidentialGrid::vacuous(spec, map_frame())?;
        Ok(Self {
            scenario,
            params,
            prior,
            map,
            observed: vec![false; spec.cell_count()],
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn spec(&self) -> &GridSpec64 {
        self.map.spec()
    }

    pub fn map_grid(&self) -> &Grid64 {
        &self.map
    }

    pub fn prior_grid(&self) -> &Grid64 {
        &self.prior
    }

    /// Cells touched by any beam so far.
    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    pub fn step(&mut self, frame: usize) -> evigrid_core::Result<FrameStep> {
        let t = self.scenario.frame_time(frame);
        let state = self.scenario.poses_at(t)?;
        let scan = self.scenario.generate_scan(t)?;
        let out = build_scan_grid_with_coverage(&scan, &state.ego, *self.map.spec(), &self.params.sensor)?;
        fuse_step_in_place(&mut self.map, &out.grid, &self.prior, &self.params)?;
        for (seen, now) in self.observed.iter_mut().zip(&out.touched) {
            *seen |= *now;
        }
        Ok(FrameStep {
            frame,
            t,
            scan_grid: out.grid,
            touched: out.touched,
        })
    }

    pub fn ground_truth(&self, t: f64) -> evigrid_core::Result<Vec<Label>> {
        self.scenario.ground_truth_grid(t, self.map.spec())
    }
}

/// Distinguishes bad inputs from failures while running.
#[derive(Debug)]
pub enum RunError {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e:#}"),
            RunError::Runtime(e) => write!(f, "runtime error: {e:#}"),
        }
    }
}

impl std::error::Error for RunError {}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Runs every requested frame, writing outputs under `config.out_dir`.
pub fn run(config: &RunConfig) -> Result<EvalReport, RunError> {
    fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("creating output directory {}", config.out_dir.display()))
        .map_err(RunError::Config)?;
    let resolved = serde_json::to_vec_pretty(&config.echo()).map_err(|e| RunError::Runtime(e.into()))?;
    write_file(&config.out_dir.join("resolved_config.json"), &resolved).map_err(RunError::Runtime)?;

    let report = run_frames(config).map_err(RunError::Runtime)?;

    let metrics = serde_json::to_vec_pretty(&report).map_err(|e| RunError::Runtime(e.into()))?;
    write_file(&config.out_dir.join("metrics.json"), &metrics).map_err(RunError::Runtime)?;
    Ok(report)
}

fn run_frames(config: &RunConfig) -> anyhow::Result<EvalReport> {
    let mut pipeline = Pipeline::new(config.scenario.clone(), config.params.clone(), config.grid)?;
    let mut frames = Vec::with_capacity(config.frames);
    for frame in config.first_frame..config.first_frame + config.frames {
        let step = pipeline.step(frame).with_context(|| format!("frame {frame}"))?;
        let grid = pipeline.map_grid();
        write_frame_outputs(config, frame, grid)?;

        let truth = pipeline.ground_truth(step.t)?;
        let decided = decisions(grid);
        let observed = pipeline.observed();
        frames.push(FrameMetrics {
            frame,
            t: step.t,
            observed_cells: observed.iter().filter(|o| **o).count() as u64,
            current_cells: step.touched.iter().filter(|o| **o).count() as u64,
            confusion: confusion(&decided, &truth, observed),
            current_confusion: confusion(&decided, &truth, &step.touched),
        });
    }
    Ok(EvalReport::from_frames(frames))
}

fn write_frame_outputs(config: &RunConfig, frame: usize, grid: &Grid64) -> anyhow::Result<()> {
    let dir = &config.out_dir;
    let outputs = &config.outputs;
    if outputs.composite {
        write_file(&dir.join(format!("frame_{frame:04}_composite.ppm")), &render_composite(grid))?;
    }
    if outputs.class_layers {
        for (class, name) in evigrid_core::belief::map::LABELS.iter().enumerate() {
            write_file(
                &dir.join(format!("frame_{frame:04}_{name}.pgm")),
                &render_class_layer(grid, class),
            )?;
        }
    }
    if outputs.dump_masses {
        let path = dir.join(format!("frame_{frame:04}_masses.csv"));
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        grid.write_csv(BufWriter::new(file))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
