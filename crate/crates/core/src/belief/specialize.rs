use std::sync::Arc;

use smallvec::{smallvec, SmallVec};

use super::frame::{map, map_frame, same_frame, Frame, Subset};
use super::mass::{MassFunction, Table};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Column-stochastic `2^n x 2^n` matrix; `S(A, B)` is the share of `m(B)`
/// moved to `A`.
#[derive(Clone, Debug)]
pub struct SpecializationMatrix<T: Scalar> {
    frame: Arc<Frame>,
    dense: Vec<T>,
    // nonzero (row, weight) pairs per column, rows ascending
    columns: Vec<SmallVec<[(u32, T); 2]>>,
}

impl<T: Scalar> SpecializationMatrix<T> {
    /// Builds from row-major entries `entries[A * 2^n + B] = S(A, B)`.
    pub fn new(frame: Arc<Frame>, entries: Vec<T>) -> Result<Self> {
        let size = frame.power_set_size();
        if entries.len() != size * size {
            return Err(Error::InvalidParameter(format!(
                "specialization matrix needs {} entries, got {}",
                size * size,
                entries.len()
            )));
        }
        if entries.iter().any(|w| !(*w >= T::zero())) {
            return Err(Error::InvalidParameter("negative specialization entry".into()));
        }
        let mut columns = Vec::with_capacity(size);
        for b in 0..size {
            let column: SmallVec<[(u32, T); 2]> = (0..size)
                .filter(|a| entries[a * size + b] != T::zero())
                .map(|a| (a as u32, entries[a * size + b]))
                .collect();
            let sum = column.iter().fold(T::zero(), |acc, (_, w)| acc + *w);
            if (sum - T::one()).abs() > T::mass_tolerance() {
                return Err(Error::InvalidParameter(format!(
                    "column {} sums to {sum}",
                    frame.describe(Subset(b as u32))
                )));
            }
            columns.push(column);
        }
        Ok(Self {
            frame,
            dense: entries,
            columns,
        })
    }

    pub fn identity(frame: Arc<Frame>) -> Self {
        let size = frame.power_set_size();
        let mut entries = vec![T::zero(); size * size];
        for a in 0..size {
            entries[a * size + a] = T::one();
        }
        Self::new(frame, entries).expect("identity is column-stochastic")
    }

    /// Mobility specialization on `{F, C, N, S, V}` for a counter value.
    ///
    /// Every set `A` containing `V` keeps `1 - zeta` of its mass and hands
    /// `zeta` to `A \ {V}`. The singleton `{V}` hands its share to `{S}`
    /// instead of the empty set: a persistently occupied mover is stopped.
    pub fn mobility(zeta: T) -> Result<Self> {
        if !(zeta >= T::zero() && zeta <= T::one()) {
            return Err(Error::InvalidParameter(format!("counter {zeta} outside [0, 1]")));
        }
        let frame = map_frame();
        let size = frame.power_set_size();
        let mut entries = vec![T::zero(); size * size];
        for b in 0..size {
            let set = Subset(b as u32);
            if set.contains(map::MOVING) {
                let target = if set == map::V { map::S } else { set.without(map::MOVING) };
                entries[target.index() * size + b] = zeta;
                entries[b * size + b] = T::one() - zeta;
            } else {
                entries[b * size + b] = T::one();
            }
        }
        Self::new(frame, entries)
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    #[inline]
    pub fn entry(&self, to: Subset, from: Subset) -> T {
        self.dense[to.index() * self.frame.power_set_size() + from.index()]
    }

    /// Nonzero `(row, weight)` pairs of column `b`, rows ascending.
    pub(crate) fn column(&self, b: usize) -> &[(u32, T)] {
        &self.columns[b]
    }

    /// Columns whose mass may leave for a set that is not a subset.
    pub fn enlarging_columns(&self) -> Vec<Subset> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(b, col)| col.iter().any(|(a, _)| !Subset(*a).is_subset_of(Subset(*b as u32))))
            .map(|(b, _)| Subset(b as u32))
            .collect()
    }
}

/// Matrix-vector product `result(A) = sum_B S(A, B) m(B)`.
pub fn specialize<T: Scalar>(m: &MassFunction<T>, s: &SpecializationMatrix<T>) -> Result<MassFunction<T>> {
    if !same_frame(m.frame(), &s.frame) {
        return Err(Error::FrameMismatch {
            left: m.frame().to_string(),
            right: s.frame.to_string(),
        });
    }
    let mut table: Table<T> = smallvec![T::zero(); m.table().len()];
    for (b, w) in m.table().iter().enumerate() {
        if *w == T::zero() {
            continue;
        }
        for &(a, share) in &s.columns[b] {
            table[a as usize] = table[a as usize] + share * *w;
        }
    }
    Ok(MassFunction::from_raw(m.frame().clone(), table, m.allows_empty()))
}
