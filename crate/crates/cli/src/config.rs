//! Run configuration: JSON config file, command-line overrides, resolved echo.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use evigrid_core::belief::ContextualDiscount;
use evigrid_core::fusion::{CounterParams, FusionParams};
use evigrid_core::grid::GridSpec;
use evigrid_core::mapio::PriorConfidence;
use evigrid_core::sensor::SensorModelParams;
use evigrid_core::sim::Scenario;
use evigrid_core::{FusionParams64, GridSpec64};
use serde::{Deserialize, Serialize};

/// Flat list of fusion tunables as written in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    pub delta_inc: f64,
    pub delta_dec: f64,
    pub gamma_o: f64,
    pub gamma_empty: f64,
    pub alpha_static: f64,
    pub alpha_dynamic: f64,
    pub alpha_free: f64,
    pub beta_b: f64,
    pub beta_r: f64,
    pub beta_t: f64,
    pub mu_occ: f64,
    pub mu_free: f64,
    pub use_prior: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        let counter = CounterParams::<f64>::default();
        let prior = PriorConfidence::<f64>::default();
        let sensor = SensorModelParams::<f64>::default();
        let rates = FusionParams::<f64>::default_discount().rates().rates().to_vec();
        Self {
            delta_inc: counter.delta_inc,
            delta_dec: counter.delta_dec,
            gamma_o: counter.gamma_o,
            gamma_empty: counter.gamma_empty,
            alpha_static: rates[0],
            alpha_dynamic: rates[1],
            alpha_free: rates[2],
            beta_b: prior.beta_b,
            beta_r: prior.beta_r,
            beta_t: prior.beta_t,
            mu_occ: sensor.mu_occ,
            mu_free: sensor.mu_free,
            use_prior: true,
        }
    }
}

impl FusionConfig {
    pub fn to_params(&self) -> anyhow::Result<FusionParams64> {
        let params = FusionParams {
            counter: CounterParams {
                delta_inc: self.delta_inc,
                delta_dec: self.delta_dec,
                gamma_o: self.gamma_o,
                gamma_empty: self.gamma_empty,
            },
            discount: ContextualDiscount::mobility(self.alpha_static, self.alpha_dynamic, self.alpha_free)?,
            prior: PriorConfidence {
                beta_b: self.beta_b,
                beta_r: self.beta_r,
                beta_t: self.beta_t,
            },
            sensor: SensorModelParams {
                mu_occ: self.mu_occ,
                mu_free: self.mu_free,
            },
            use_prior: self.use_prior,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Which files to write per frame. Metrics are always written.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputToggles {
    /// One grayscale PGM per class.
    pub class_layers: bool,
    /// Colour PPM of the pignistic decision.
    pub composite: bool,
    /// CSV dump of every cell's masses.
    pub dump_masses: bool,
}

/// Contents of the `--config` file; every field optional.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub fusion: FusionConfig,
    pub grid: Option<GridSpec64>,
    pub outputs: OutputToggles,
    pub first_frame: usize,
    pub frames: Option<usize>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Grid used when neither the config nor the scenario names one: 100 m
/// square centred on the origin at the default resolution.
pub fn default_grid() -> GridSpec64 {
    GridSpec::new(-50.0, -50.0, 0.5, 200, 200).expect("valid default grid")
}

/// Fully resolved run settings.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario_path: PathBuf,
    pub scenario: Scenario,
    pub fusion: FusionConfig,
    pub params: FusionParams64,
    pub grid: GridSpec64,
    pub out_dir: PathBuf,
    pub first_frame: usize,
    pub frames: usize,
    pub outputs: OutputToggles,
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub frames: Option<usize>,
    pub seed: Option<u64>,
    pub no_map: bool,
    pub dump_masses: bool,
    pub images: bool,
}

impl RunConfig {
    pub fn resolve(
        scenario_path: &Path,
        config: ConfigFile,
        out_dir: &Path,
        overrides: &Overrides,
    ) -> anyhow::Result<Self> {
        let mut scenario =
            Scenario::load(scenario_path).with_context(|| format!("loading scenario {}", scenario_path.display()))?;
        if let Some(seed) = overrides.seed.or(config.seed) {
            scenario.rng_seed = seed;
        }
        let mut fusion = config.fusion;
        if overrides.no_map {
            fusion.use_prior = false;
        }
        let params = fusion.to_params().context("invalid fusion parameters")?;
        let grid = config.grid.or(scenario.grid).unwrap_or_else(default_grid);
        grid.validate().context("invalid grid")?;
        let available = scenario.frame_count();
        if config.first_frame >= available {
            bail!("first_frame {} beyond the scenario's {available} frames", config.first_frame);
        }
        let frames = overrides
            .frames
            .or(config.frames)
            .unwrap_or(available)
            .min(available - config.first_frame);
        let mut outputs = config.outputs;
        if overrides.images {
            outputs.class_layers = true;
            outputs.composite = true;
        }
        outputs.dump_masses |= overrides.dump_masses;
        Ok(Self {
            scenario_path: scenario_path.to_path_buf(),
            scenario,
            fusion,
            params,
            grid,
            out_dir: out_dir.to_path_buf(),
            first_frame: config.first_frame,
            frames,
            outputs,
        })
    }

    /// Build a config around an in-memory scenario.
    pub fn for_scenario(scenario: Scenario, fusion: FusionConfig, grid: Option<GridSpec64>, out_dir: &Path) -> anyhow::Result<Self> {
        let params = fusion.to_params()?;
        let grid = grid.or(scenario.grid).unwrap_or_else(default_grid);
        Ok(Self {
            scenario_path: PathBuf::new(),
            frames: scenario.frame_count(),
            scenario,
            fusion,
            params,
            grid,
            out_dir: out_dir.to_path_buf(),
            first_frame: 0,
            outputs: OutputToggles::default(),
        })
    }

    /// Everything that determined the run, for `resolved_config.json`.
    pub fn echo(&self) -> ResolvedConfig {
        ResolvedConfig {
            scenario: self.scenario_path.display().to_string(),
            seed: self.scenario.rng_seed,
            fusion: self.fusion.clone(),
            grid: self.grid,
            first_frame: self.first_frame,
            frames: self.frames,
            frame_rate: self.scenario.frame_rate,
            outputs: self.outputs,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolvedConfig {
    pub scenario: String,
    pub seed: u64,
    pub fusion: FusionConfig,
    pub grid: GridSpec64,
    pub first_frame: usize,
    pub frames: usize,
    pub frame_rate: f64,
    pub outputs: OutputToggles,
}
