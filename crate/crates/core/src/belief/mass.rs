//! Dense mass functions and the combination rules over them.

use std::sync::Arc;

use smallvec::{smallvec, SmallVec};

use super::frame::{same_frame, Frame, Subset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Inline capacity covers frames of up to five elements without allocating.
pub(crate) type Table<T> = SmallVec<[T; 32]>;

/// Focal sets with their weights, in ascending subset order.
pub type FocalSets<T> = SmallVec<[(Subset, T); 32]>;

/// A basic belief assignment over a frame, stored as a dense `2^n` table.
#[derive(Clone, Debug)]
pub struct MassFunction<T: Scalar> {
    frame: Arc<Frame>,
    table: Table<T>,
    allows_empty: bool,
}

impl<T: Scalar> PartialEq for MassFunction<T> {
    fn eq(&self, other: &Self) -> bool {
        same_frame(&self.frame, &other.frame)
            && self.allows_empty == other.allows_empty
            && self.table == other.table
    }
}

impl<T: Scalar> MassFunction<T> {
    /// Total ignorance: all mass on the whole frame.
    pub fn vacuous(frame: &Arc<Frame>) -> Self {
        let mut table: Table<T> = smallvec![T::zero(); frame.power_set_size()];
        table[frame.omega().index()] = T::one();
        Self {
            frame: frame.clone(),
            table,
            allows_empty: false,
        }
    }

    /// All mass on a single subset.
    pub fn categorical(frame: &Arc<Frame>, subset: Subset) -> Result<Self> {
        Self::from_focal_sets(frame, &[(subset, T::one())], subset.is_empty())
    }

    /// `m(focal) = weight`, `m(Omega) = 1 - weight`.
    pub fn simple_support(frame: &Arc<Frame>, focal: Subset, weight: T) -> Result<Self> {
        if !(weight >= T::zero() && weight <= T::one()) {
            return Err(Error::InvalidMass(format!("support weight {weight} outside [0, 1]")));
        }
        Self::from_focal_sets(
            frame,
            &[(focal, weight), (frame.omega(), T::one() - weight)],
            focal.is_empty(),
        )
    }

    /// Builds a mass function from `(subset, weight)` pairs. Repeated subsets
    /// accumulate. The result must satisfy every mass-function invariant.
    pub fn from_focal_sets(frame: &Arc<Frame>, focal: &[(Subset, T)], allows_empty: bool) -> Result<Self> {
        let mut table: Table<T> = smallvec![T::zero(); frame.power_set_size()];
        for &(subset, weight) in focal {
            if !frame.contains_subset(subset) {
                return Err(Error::InvalidMass(format!(
                    "subset {:#b} outside frame {frame}",
                    subset.bits()
                )));
            }
            table[subset.index()] = table[subset.index()] + weight;
        }
        Self::from_table(frame, table.into_iter().collect(), allows_empty)
    }

    /// Validating constructor from a dense table indexed by subset bitmask.
    pub fn from_table(frame: &Arc<Frame>, table: Vec<T>, allows_empty: bool) -> Result<Self> {
        if table.len() != frame.power_set_size() {
            return Err(Error::InvalidMass(format!(
                "table has {} entries, frame {frame} needs {}",
                table.len(),
                frame.power_set_size()
            )));
        }
        let m = Self {
            frame: frame.clone(),
            table: table.into_iter().collect(),
            allows_empty,
        };
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn from_raw(frame: Arc<Frame>, table: Table<T>, allows_empty: bool) -> Self {
        debug_assert_eq!(table.len(), frame.power_set_size());
        Self {
            frame,
            table,
            allows_empty,
        }
    }

    /// Checks nonnegativity, unit total mass and the empty-set flag.
    pub fn validate(&self) -> Result<()> {
        if let Some((k, w)) = self.table.iter().enumerate().find(|(_, w)| !(**w >= T::zero())) {
            return Err(Error::InvalidMass(format!(
                "weight {w} on {} is negative or NaN",
                self.frame.describe(Subset(k as u32))
            )));
        }
        let total = self.total();
        if (total - T::one()).abs() > T::mass_tolerance() {
            return Err(Error::InvalidMass(format!("total mass {total} differs from 1")));
        }
        if !self.allows_empty && self.table[0] != T::zero() {
            return Err(Error::InvalidMass(format!(
                "normalized mass function has m(empty) = {}",
                self.table[0]
            )));
        }
        Ok(())
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn allows_empty(&self) -> bool {
        self.allows_empty
    }

    /// Dense weights indexed by subset bitmask.
    pub fn table(&self) -> &[T] {
        &self.table
    }

    #[inline]
    pub fn get(&self, subset: Subset) -> T {
        self.table[subset.index()]
    }

    pub fn total(&self) -> T {
        self.table.iter().copied().fold(T::zero(), |acc, w| acc + w)
    }

    /// Subsets carrying strictly positive mass, ascending.
    pub fn focal_sets(&self) -> FocalSets<T> {
        let mut out = FocalSets::new();
        for (k, w) in self.table.iter().enumerate() {
            if *w > T::zero() {
                out.push((Subset(k as u32), *w));
            }
        }
        out
    }

    /// Indices of the focal sets, ascending.
    pub(crate) fn focal_indices(&self) -> SmallVec<[u32; 32]> {
        let mut out = SmallVec::new();
        for (k, w) in self.table.iter().enumerate() {
            if *w > T::zero() {
                out.push(k as u32);
            }
        }
        out
    }

    pub fn is_vacuous(&self) -> bool {
        let omega = self.frame.omega().index();
        self.table
            .iter()
            .enumerate()
            .all(|(k, w)| if k == omega { *w == T::one() } else { *w == T::zero() })
    }

    /// Rescales so the weights sum to one when the drift exceeds the
    /// renormalization threshold.
    pub fn renormalized(mut self) -> Self {
        let total = self.total();
        if (total - T::one()).abs() > T::renormalize_threshold() && total > T::zero() {
            for w in self.table.iter_mut() {
                *w = *w / total;
            }
        }
        self
    }

    /// Sum of `m(A)` over every nonempty `A` included in `subset`.
    pub fn belief(&self, subset: Subset) -> T {
        self.sum_where(|a| !a.is_empty() && a.is_subset_of(subset))
    }

    /// Sum of `m(A)` over every `A` intersecting `subset`.
    pub fn plausibility(&self, subset: Subset) -> T {
        self.sum_where(|a| !a.intersection(subset).is_empty())
    }

    /// Sum of `m(A)` over every `A` with `predicate(A)`.
    pub fn sum_where(&self, predicate: impl Fn(Subset) -> bool) -> T {
        self.table
            .iter()
            .enumerate()
            .filter(|(k, _)| predicate(Subset(*k as u32)))
            .fold(T::zero(), |acc, (_, w)| acc + *w)
    }

    fn check_same_frame(&self, other: &Self) -> Result<()> {
        if same_frame(&self.frame, &other.frame) {
            Ok(())
        } else {
            Err(Error::FrameMismatch {
                left: self.frame.to_string(),
                right: other.frame.to_string(),
            })
        }
    }
}

/// Accumulates `m1(B) m2(C)` into `out[merge(B, C)]`, iterating `B` then `C`
/// in ascending order over focal sets only. Skipping zero weights leaves
/// every sum bit-identical to the full `2^n x 2^n` double loop.
fn pairwise<T: Scalar>(m1: &MassFunction<T>, m2: &MassFunction<T>, merge: impl Fn(u32, u32) -> u32) -> Table<T> {
    let mut out: Table<T> = smallvec![T::zero(); m1.table.len()];
    let right = m2.focal_indices();
    for (b, wb) in m1.table.iter().enumerate() {
        if *wb == T::zero() {
            continue;
        }
        for &c in &right {
            let a = merge(b as u32, c) as usize;
            out[a] = out[a] + *wb * m2.table[c as usize];
        }
    }
    out
}

/// Unnormalized conjunctive rule; conflict stays on the empty set.
pub fn conjunctive_combine<T: Scalar>(m1: &MassFunction<T>, m2: &MassFunction<T>) -> Result<MassFunction<T>> {
    m1.check_same_frame(m2)?;
    let table = pairwise(m1, m2, |b, c| b & c);
    Ok(MassFunction::from_raw(m1.frame.clone(), table, true))
}

/// Disjunctive rule: mass of each pair flows to the union.
pub fn disjunctive_combine<T: Scalar>(m1: &MassFunction<T>, m2: &MassFunction<T>) -> Result<MassFunction<T>> {
    m1.check_same_frame(m2)?;
    let table = pairwise(m1, m2, |b, c| b | c);
    let allows_empty = m1.allows_empty && m2.allows_empty;
    Ok(MassFunction::from_raw(m1.frame.clone(), table, allows_empty))
}

/// Conjunctive rule renormalized over nonempty sets.
pub fn dempster_combine<T: Scalar>(m1: &MassFunction<T>, m2: &MassFunction<T>) -> Result<MassFunction<T>> {
    let conj = conjunctive_combine(m1, m2)?;
    normalize_conflict(conj)
}

/// Drops the empty-set mass and rescales the rest by `1 / (1 - k)`.
fn normalize_conflict<T: Scalar>(conj: MassFunction<T>) -> Result<MassFunction<T>> {
    let conflict = conj.table[0];
    if conflict >= T::one() - T::total_conflict_margin() {
        return Err(Error::TotalConflict {
            conflict: conflict.to_f64().unwrap_or(f64::NAN),
        });
    }
    let scale = T::one() - conflict;
    let MassFunction { frame, mut table, .. } = conj;
    table[0] = T::zero();
    for w in table.iter_mut().skip(1) {
        *w = *w / scale;
    }
    Ok(MassFunction::from_raw(frame, table, false))
}

/// Pignistic probability of each frame element: every focal set splits its
/// mass evenly among its members.
pub fn pignistic<T: Scalar>(m: &MassFunction<T>) -> Result<Vec<T>> {
    if m.table[0] > T::zero() {
        return Err(Error::InvalidMass(format!(
            "pignistic transform needs m(empty) = 0, got {}",
            m.table[0]
        )));
    }
    let mut betp = vec![T::zero(); m.frame.len()];
    for (a, w) in m.table.iter().enumerate().skip(1) {
        if *w == T::zero() {
            continue;
        }
        let subset = Subset(a as u32);
        let share = *w / T::lit(subset.cardinality() as f64);
        for e in subset.elements() {
            betp[e] = betp[e] + share;
        }
    }
    Ok(betp)
}

/// Index of the strictly largest probability, or `None` on a tie within
/// the scalar's tie tolerance.
pub fn argmax_class<T: Scalar>(probabilities: &[T]) -> Option<usize> {
    argmax_class_with_margin(probabilities, T::tie_tolerance())
}

/// Index of the largest probability if it beats every other one by more
/// than `margin`.
pub fn argmax_class_with_margin<T: Scalar>(probabilities: &[T], margin: T) -> Option<usize> {
    let (best, &top) = probabilities
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, &T)>, (k, p)| match acc {
            Some((_, q)) if *q >= *p => acc,
            _ => Some((k, p)),
        })?;
    let tied = probabilities
        .iter()
        .enumerate()
        .any(|(k, p)| k != best && top - *p <= margin);
    (!tied).then_some(best)
}

impl<T: Scalar> MassFunction<T> {
    pub fn conjunctive(&self, other: &Self) -> Result<Self> {
        conjunctive_combine(self, other)
    }

    pub fn disjunctive(&self, other: &Self) -> Result<Self> {
        disjunctive_combine(self, other)
    }

    pub fn dempster(&self, other: &Self) -> Result<Self> {
        dempster_combine(self, other)
    }

    pub fn pignistic(&self) -> Result<Vec<T>> {
        pignistic(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::frame::{map, map_frame, scan, scan_frame};

    fn mg(focal: &[(Subset, f64)]) -> MassFunction<f64> {
        MassFunction::from_focal_sets(&map_frame(), focal, false).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn vacuous_tables() {
        let m = MassFunction::<f64>::vacuous(&map_frame());
        assert_eq!(m.get(map::OMEGA), 1.0);
        assert_eq!(m.total(), 1.0);
        let s = MassFunction::<f64>::vacuous(&scan_frame());
        assert_eq!(s.get(scan::OMEGA), 1.0);
        assert!(s.is_vacuous());
    }

    #[test]
    fn validation_rejects_bad_tables() {
        let frame = map_frame();
        assert!(MassFunction::<f64>::from_focal_sets(&frame, &[(map::F, 0.5)], false).is_err());
        assert!(MassFunction::<f64>::from_focal_sets(&frame, &[(map::F, 1.5), (map::C, -0.5)], false).is_err());
        assert!(MassFunction::<f64>::from_focal_sets(&frame, &[(Subset::EMPTY, 1.0)], false).is_err());
        assert!(MassFunction::<f64>::from_focal_sets(&frame, &[(Subset::EMPTY, 1.0)], true).is_ok());
        assert!(MassFunction::<f64>::from_focal_sets(&frame, &[(Subset(64), 1.0)], false).is_err());
        assert!(MassFunction::<f64>::from_table(&frame, vec![0.0; 4], false).is_err());
    }

    #[test]
    fn conjunctive_agreement_and_identity() {
        let f = mg(&[(map::F, 1.0)]);
        let r = conjunctive_combine(&f, &f).unwrap();
        assert_eq!(r.get(map::F), 1.0);
        let m = mg(&[(map::F, 0.3), (map::ROAD, 0.5), (map::OMEGA, 0.2)]);
        let v = MassFunction::vacuous(&map_frame());
        assert_eq!(conjunctive_combine(&v, &m).unwrap().table(), m.table());
        assert!(conjunctive_combine(&v, &m).unwrap().allows_empty());
    }

    #[test]
    fn conjunctive_worked_example() {
        let m1 = mg(&[(map::F, 0.6), (map::OMEGA, 0.4)]);
        let m2 = mg(&[(map::C, 0.9), (map::OMEGA, 0.1)]);
        let r = conjunctive_combine(&m1, &m2).unwrap();
        close(r.get(Subset::EMPTY), 0.54, 1e-12);
        close(r.get(map::F), 0.06, 1e-12);
        close(r.get(map::C), 0.36, 1e-12);
        close(r.get(map::OMEGA), 0.04, 1e-12);
    }

    #[test]
    fn disjunctive_examples() {
        let r = disjunctive_combine(&mg(&[(map::F, 1.0)]), &mg(&[(map::C, 1.0)])).unwrap();
        assert_eq!(r.get(map::F.union(map::C)), 1.0);

        let m1 = mg(&[(map::F, 0.5), (map::OMEGA, 0.5)]);
        let r = disjunctive_combine(&m1, &m1).unwrap();
        close(r.get(map::F), 0.25, 1e-12);
        close(r.get(map::OMEGA), 0.75, 1e-12);

        let empty = MassFunction::categorical(&map_frame(), Subset::EMPTY).unwrap();
        assert_eq!(disjunctive_combine(&m1, &empty).unwrap().table(), m1.table());
    }

    #[test]
    fn dempster_examples() {
        let m1 = mg(&[(map::F, 0.6), (map::OMEGA, 0.4)]);
        let m2 = mg(&[(map::C, 0.9), (map::OMEGA, 0.1)]);
        let r = dempster_combine(&m1, &m2).unwrap();
        close(r.get(map::F), 0.06 / 0.46, 1e-12);
        close(r.get(map::C), 0.36 / 0.46, 1e-12);
        close(r.get(map::OMEGA), 0.04 / 0.46, 1e-12);
        assert_eq!(r.get(Subset::EMPTY), 0.0);
        assert!(!r.allows_empty());

        let err = dempster_combine(&mg(&[(map::F, 1.0)]), &mg(&[(map::C, 1.0)])).unwrap_err();
        assert!(matches!(err, Error::TotalConflict { .. }));

        let v = MassFunction::vacuous(&map_frame());
        assert_eq!(dempster_combine(&m1, &v).unwrap(), m1);
    }

    #[test]
    fn frame_mismatch_is_an_error() {
        let a = MassFunction::<f64>::vacuous(&map_frame());
        let b = MassFunction::<f64>::vacuous(&scan_frame());
        assert!(matches!(conjunctive_combine(&a, &b), Err(Error::FrameMismatch { .. })));
        assert!(disjunctive_combine(&a, &b).is_err());
        assert!(dempster_combine(&a, &b).is_err());
    }

    #[test]
    fn pignistic_examples() {
        let v = MassFunction::<f64>::vacuous(&map_frame());
        for p in pignistic(&v).unwrap() {
            close(p, 0.2, 1e-15);
        }
        let p = pignistic(&mg(&[(map::F, 0.5), (map::OMEGA, 0.5)])).unwrap();
        close(p[0], 0.6, 1e-15);
        for q in &p[1..] {
            close(*q, 0.1, 1e-15);
        }
        let p = pignistic(&mg(&[(map::C.union(map::N), 1.0)])).unwrap();
        assert_eq!(p, vec![0.0, 0.5, 0.5, 0.0, 0.0]);

        let conj = conjunctive_combine(&mg(&[(map::F, 1.0)]), &mg(&[(map::C, 0.5), (map::OMEGA, 0.5)])).unwrap();
        assert!(pignistic(&conj).is_err());
    }

    #[test]
    fn argmax_with_ties() {
        assert_eq!(argmax_class(&[0.2f64; 5]), None);
        assert_eq!(argmax_class(&[0.6, 0.1, 0.1, 0.1, 0.1]), Some(0));
        assert_eq!(argmax_class(&[0.0, 0.5, 0.5, 0.0, 0.0]), None);
        assert_eq!(argmax_class(&[0.1, 0.2, 0.3, 0.4, 0.0]), Some(3));
    }

    #[test]
    fn generic_over_f32() {
        let frame = map_frame();
        let m1 = MassFunction::<f32>::simple_support(&frame, map::F, 0.6).unwrap();
        let m2 = MassFunction::<f32>::simple_support(&frame, map::C, 0.9).unwrap();
        let r = dempster_combine(&m1, &m2).unwrap();
        assert!((r.get(map::C) - 0.782_608_7).abs() < 1e-5);
        assert!(r.validate().is_ok());
    }
}
