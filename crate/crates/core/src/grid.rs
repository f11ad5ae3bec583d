//! World-aligned evidential grids.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::belief::{same_frame, Frame, MassFunction, Subset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Geometry of a grid: cell `(0, 0)` has its lower-left corner at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub origin_x: T,
    pub origin_y: T,
    pub resolution: T,
    pub width: usize,
    pub height: usize,
}

impl<T: Scalar> GridSpec<T> {
    /// Default cell size, 0.5 m.
    pub fn default_resolution() -> T {
        T::lit(0.5)
    }

    pub fn new(origin_x: T, origin_y: T, resolution: T, width: usize, height: usize) -> Result<Self> {
        let spec = Self {
            origin_x,
            origin_y,
            resolution,
            width,
            height,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > T::zero()) || !self.resolution.is_finite() {
            return Err(Error::InvalidParameter(format!("resolution {} must be positive", self.resolution)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter("grid width and height must be at least 1".into()));
        }
        if !self.origin_x.is_finite() || !self.origin_y.is_finite() {
            return Err(Error::InvalidParameter("grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    /// Row-major storage index.
    #[inline]
    pub fn linear_index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height
    }

    /// Unbounded cell coordinates of a world point.
    #[inline]
    pub fn world_to_cell_unbounded(&self, x: T, y: T) -> (i64, i64) {
        let i = ((x - self.origin_x) / self.resolution).floor();
        let j = ((y - self.origin_y) / self.resolution).floor();
        (to_i64(i), to_i64(j))
    }

    /// Cell containing `(x, y)`, or `None` outside the grid.
    pub fn world_to_cell(&self, x: T, y: T) -> Option<(usize, usize)> {
        let (i, j) = self.world_to_cell_unbounded(x, y);
        self.contains(i, j).then_some((i as usize, j as usize))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Result<(T, T)> {
        if i >= self.width || j >= self.height {
            return Err(self.out_of_bounds(i as i64, j as i64));
        }
        Ok(self.cell_center_unchecked(i, j))
    }

    #[inline]
    pub(crate) fn cell_center_unchecked(&self, i: usize, j: usize) -> (T, T) {
        let half = T::lit(0.5);
        (
            self.origin_x + (T::lit(i as f64) + half) * self.resolution,
            self.origin_y + (T::lit(j as f64) + half) * self.resolution,
        )
    }

    pub(crate) fn out_of_bounds(&self, i: i64, j: i64) -> Error {
        Error::OutOfBounds {
            i,
            j,
            width: self.width,
            height: self.height,
        }
    }

    /// All in-bounds `(i, j)` in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |j| (0..self.width).map(move |i| (i, j)))
    }
}

fn to_i64<T: Scalar>(v: T) -> i64 {
    // NaN and huge values land far outside any grid
    v.to_i64().unwrap_or(i64::MIN)
}

/// A grid of mass functions over one frame, plus a persistence counter per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct EvidentialGrid<T: Scalar> {
    spec: GridSpec<T>,
    frame: Arc<Frame>,
    masses: Vec<T>,
    zeta: Vec<T>,
}

impl<T: Scalar> EvidentialGrid<T> {
    /// Every cell vacuous, every counter zero.
    pub fn vacuous(spec: GridSpec<T>, frame: Arc<Frame>) -> Result<Self> {
        spec.validate()?;
        let vacuous = MassFunction::vacuous(&frame);
        let cells = spec.cell_count();
        let mut masses = Vec::with_capacity(cells * frame.power_set_size());
        for _ in 0..cells {
            masses.extend_from_slice(vacuous.table());
        }
        Ok(Self {
            spec,
            frame,
            masses,
            zeta: vec![T::zero(); cells],
        })
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    fn slot(&self, i: usize, j: usize) -> Result<usize> {
        if i >= self.spec.width || j >= self.spec.height {
            return Err(self.spec.out_of_bounds(i as i64, j as i64));
        }
        Ok(self.spec.linear_index(i, j))
    }

    /// Raw weights of a cell indexed by subset bitmask.
    pub fn weights(&self, i: usize, j: usize) -> Result<&[T]> {
        let k = self.slot(i, j)?;
        Ok(self.weights_at(k))
    }

    #[inline]
    pub(crate) fn weights_at(&self, k: usize) -> &[T] {
        let size = self.frame.power_set_size();
        &self.masses[k * size..(k + 1) * size]
    }

    pub(crate) fn weights_at_mut(&mut self, k: usize) -> &mut [T] {
        let size = self.frame.power_set_size();
        &mut self.masses[k * size..(k + 1) * size]
    }

    pub fn mass(&self, i: usize, j: usize) -> Result<MassFunction<T>> {
        let k = self.slot(i, j)?;
        Ok(self.mass_at(k))
    }

    #[inline]
    pub(crate) fn mass_at(&self, k: usize) -> MassFunction<T> {
        MassFunction::from_raw(self.frame.clone(), smallvec::SmallVec::from_slice(self.weights_at(k)), false)
    }

    pub fn set_mass(&mut self, i: usize, j: usize, mass: &MassFunction<T>) -> Result<()> {
        let k = self.slot(i, j)?;
        self.check_mass(mass)?;
        self.set_mass_at(k, mass);
        Ok(())
    }

    fn check_mass(&self, mass: &MassFunction<T>) -> Result<()> {
        if !same_frame(&self.frame, mass.frame()) {
            return Err(Error::FrameMismatch {
                left: self.frame.to_string(),
                right: mass.frame().to_string(),
            });
        }
        if mass.get(Subset::EMPTY) != T::zero() {
            return Err(Error::InvalidMass("grid cells hold normalized mass functions".into()));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn set_mass_at(&mut self, k: usize, mass: &MassFunction<T>) {
        let size = self.frame.power_set_size();
        self.masses[k * size..(k + 1) * size].copy_from_slice(mass.table());
    }

    pub fn zeta(&self, i: usize, j: usize) -> Result<T> {
        let k = self.slot(i, j)?;
        Ok(self.zeta[k])
    }

    pub fn set_zeta(&mut self, i: usize, j: usize, zeta: T) -> Result<()> {
        if !(zeta >= T::zero() && zeta <= T::one()) {
            return Err(Error::InvalidParameter(format!("counter {zeta} outside [0, 1]")));
        }
        let k = self.slot(i, j)?;
        self.zeta[k] = zeta;
        Ok(())
    }

    #[inline]
    pub(crate) fn zeta_at(&self, k: usize) -> T {
        self.zeta[k]
    }

    #[inline]
    pub(crate) fn set_zeta_at(&mut self, k: usize, zeta: T) {
        self.zeta[k] = zeta;
    }

    /// Copies `mass` into every cell; counters are left alone.
    pub fn fill(&mut self, mass: &MassFunction<T>) -> Result<()> {
        self.check_mass(mass)?;
        let size = self.frame.power_set_size();
        for chunk in self.masses.chunks_exact_mut(size) {
            chunk.copy_from_slice(mass.table());
        }
        Ok(())
    }

    /// Writes one CSV row per cell: `i,j,zeta,m_hex0,...` with weights in
    /// ascending subset-bitmask order and 9 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let size = self.frame.power_set_size();
        write!(out, "i,j,zeta")?;
        for k in 0..size {
            write!(out, ",m_hex{k}")?;
        }
        writeln!(out)?;
        for (i, j) in self.spec.cells() {
            let k = self.spec.linear_index(i, j);
            write!(out, "{i},{j},{}", format_significant(self.zeta[k], 9))?;
            for w in self.weights_at(k) {
                write!(out, ",{}", format_significant(*w, 9))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Decimal rendering with `digits` significant digits, `%g`-style: fixed
/// notation for moderate exponents, scientific otherwise, trailing zeros
/// removed.
pub fn format_significant<T: Scalar>(value: T, digits: usize) -> String {
    let v = value.to_f64().unwrap_or(f64::NAN);
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), v);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if exponent < -5 || exponent >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exponent}");
    }
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
