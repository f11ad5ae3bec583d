//! Evidential occupancy grids fused with prior vector maps.
//!
//! Lidar scans become grids of mass functions over `{F, O}`. Building and
//! road polygons become a prior grid over `{F, C, N, S, V}`. Each frame the
//! scan evidence is refined onto the richer frame, constrained by the
//! prior, and fused into a persistent map grid with a rule that routes
//! appearance conflict to the moving class, a per-cell counter that turns
//! persistent movers into stopped objects, and contextual discounting that
//! forgets stale evidence at a per-context rate.
//!
//! The belief algebra, grids, sensor model and fusion are generic over the
//! scalar type; `f64` aliases are provided at the crate root.

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod belief;
mod error;
pub mod fusion;
pub mod grid;
pub mod mapio;
pub mod scalar;
pub mod sensor;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type MassFunction64 = belief::MassFunction<f64>;
pub type MassFunction32 = belief::MassFunction<f32>;
pub type Grid64 = grid::EvidentialGrid<f64>;
pub type Grid32 = grid::EvidentialGrid<f32>;
pub type GridSpec64 = grid::GridSpec<f64>;
pub type FusionParams64 = fusion::FusionParams<f64>;
pub type VectorMap64 = mapio::VectorMap<f64>;
pub type Pose64 = sensor::Pose<f64>;
pub type Scan64 = sensor::Scan<f64>;
