//! Scenario runner around `evigrid-core`: configuration, the frame loop,
//! image and CSV outputs, and evaluation against simulated ground truth.

pub mod config;
pub mod metrics;
pub mod pipeline;
pub mod render;

pub use config::{ConfigFile, FusionConfig, Overrides, OutputToggles, RunConfig};
pub use metrics::{Confusion, EvalReport};
pub use pipeline::{run, FrameStep, Pipeline, RunError};
