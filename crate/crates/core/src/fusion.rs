//! Temporal fusion of scan grids into the map grid.
//!
//! Per cell and frame: inject the map prior into the scan evidence, split
//! the conflict with the previous map mass, update the persistence counter,
//! specialize, discount, and combine with the mobility-aware Yager rule.

use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

use crate::belief::{
    contextual_discount, dempster_combine, map, map_frame, refine, same_frame, scan_frame, specialize,
    ContextualDiscount, MassFunction, Refining, SpecializationMatrix, Subset,
};
use crate::error::{Error, Result};
use crate::grid::EvidentialGrid;
use crate::mapio::PriorConfidence;
use crate::scalar::Scalar;
use crate::sensor::SensorModelParams;

/// Conflict of a previous/observed pair, by species.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConflictSplit<T> {
    /// Previously free, now occupied: an object appeared.
    pub k_fo: T,
    /// Previously occupied, now free: an object left.
    pub k_of: T,
    /// Every other disjoint pair.
    pub k_res: T,
}

impl<T: Scalar> ConflictSplit<T> {
    pub fn total(&self) -> T {
        self.k_fo + self.k_of + self.k_res
    }

    /// The appearance and disappearance conflict that drives the counter.
    pub fn dynamic(&self) -> T {
        self.k_fo + self.k_of
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterParams<T> {
    pub delta_inc: T,
    pub delta_dec: T,
    pub gamma_o: T,
    pub gamma_empty: T,
}

impl<T: Scalar> Default for CounterParams<T> {
    fn default() -> Self {
        Self {
            delta_inc: T::lit(0.03),
            delta_dec: T::lit(0.4),
            gamma_o: T::lit(0.6),
            gamma_empty: T::lit(0.1),
        }
    }
}

impl<T: Scalar> CounterParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta_inc", self.delta_inc),
            ("delta_dec", self.delta_dec),
            ("gamma_o", self.gamma_o),
            ("gamma_empty", self.gamma_empty),
        ] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Every tunable of the pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionParams<T: Scalar> {
    pub counter: CounterParams<T>,
    pub discount: ContextualDiscount<T>,
    pub prior: PriorConfidence<T>,
    pub sensor: SensorModelParams<T>,
    /// When false the prior grid is ignored (map ablation).
    pub use_prior: bool,
}

impl<T: Scalar> FusionParams<T> {
    pub fn default_discount() -> ContextualDiscount<T> {
        ContextualDiscount::mobility(T::lit(0.05), T::lit(0.4), T::lit(0.3)).expect("valid default rates")
    }

    pub fn validate(&self) -> Result<()> {
        self.counter.validate()?;
        self.prior.validate()?;
        self.sensor.validate()
    }
}

impl<T: Scalar> Default for FusionParams<T> {
    fn default() -> Self {
        Self {
            counter: CounterParams::default(),
            discount: Self::default_discount(),
            prior: PriorConfidence::default(),
            sensor: SensorModelParams::default(),
            use_prior: true,
        }
    }
}

/// Scan evidence refined onto the map frame, combined with the prior by
/// Dempster's rule when `use_prior` is set.
pub fn inject_prior<T: Scalar>(
    m_sg: &MassFunction<T>,
    m_pg: &MassFunction<T>,
    use_prior: bool,
) -> Result<MassFunction<T>> {
    let refined = refine(m_sg, refining())?;
    if use_prior {
        dempster_combine(&refined, m_pg)
    } else {
        Ok(refined)
    }
}

fn refining() -> &'static Refining {
    static REFINING: std::sync::OnceLock<Refining> = std::sync::OnceLock::new();
    REFINING.get_or_init(Refining::scan_to_map)
}

#[inline]
fn conflict_species(prev: Subset, obs: Subset) -> Species {
    if prev == map::F && !obs.is_empty() && obs.is_subset_of(map::OCCUPIED) {
        Species::FreeToOccupied
    } else if obs == map::F && !prev.is_empty() && prev.is_subset_of(map::OCCUPIED) {
        Species::OccupiedToFree
    } else {
        Species::Residual
    }
}

enum Species {
    FreeToOccupied,
    OccupiedToFree,
    Residual,
}

/// Classifies every disjoint pair of focal sets of `(m_prev, m_obs)`.
pub fn split_conflict<T: Scalar>(m_prev: &MassFunction<T>, m_obs: &MassFunction<T>) -> Result<ConflictSplit<T>> {
    check_map_frame(m_prev)?;
    check_map_frame(m_obs)?;
    let mut split = ConflictSplit::default();
    let right = m_obs.focal_indices();
    for a in m_prev.focal_indices() {
        let wa = m_prev.table()[a as usize];
        for &b in &right {
            if a & b == 0 {
                accumulate(&mut split, Subset(a), Subset(b), wa * m_obs.table()[b as usize]);
            }
        }
    }
    Ok(split)
}

#[inline]
fn accumulate<T: Scalar>(split: &mut ConflictSplit<T>, a: Subset, b: Subset, w: T) {
    match conflict_species(a, b) {
        Species::FreeToOccupied => split.k_fo = split.k_fo + w,
        Species::OccupiedToFree => split.k_of = split.k_of + w,
        Species::Residual => split.k_res = split.k_res + w,
    }
}

fn check_map_frame<T: Scalar>(m: &MassFunction<T>) -> Result<()> {
    if same_frame(m.frame(), &map_frame()) {
        Ok(())
    } else {
        Err(Error::FrameMismatch {
            left: m.frame().to_string(),
            right: map_frame().to_string(),
        })
    }
}

/// Mass on subsets of `{C, N, S, V}`.
pub fn occupied_mass<T: Scalar>(m: &MassFunction<T>) -> T {
    m.sum_where(|a| !a.is_empty() && a.is_subset_of(map::OCCUPIED))
}

/// Raises the counter on quiet occupied cells, lowers it on dynamic
/// conflict, and otherwise leaves it alone.
pub fn update_counter<T: Scalar>(zeta: T, m_prev: &MassFunction<T>, split: &ConflictSplit<T>, p: &CounterParams<T>) -> T {
    counter_step(zeta, occupied_mass(m_prev), split, p)
}

fn counter_step<T: Scalar>(zeta: T, occupied: T, split: &ConflictSplit<T>, p: &CounterParams<T>) -> T {
    let conflict = split.dynamic();
    if occupied >= p.gamma_o && conflict <= p.gamma_empty {
        (zeta + p.delta_inc).min(T::one())
    } else if conflict > p.gamma_empty {
        (zeta - p.delta_dec).max(T::zero())
    } else {
        zeta
    }
}

/// Conjunctive combination whose conflict is redistributed instead of
/// normalized: appearance conflict goes to `{V}`, everything else to the
/// whole frame. Argument order matters (`m1` previous, `m2` observed).
pub fn yager_modified_combine<T: Scalar>(m1: &MassFunction<T>, m2: &MassFunction<T>) -> Result<MassFunction<T>> {
    yager_modified_with_split(m1, m2).map(|(m, _)| m)
}

/// As [`yager_modified_combine`], also returning the conflict split of the
/// conjunctive step.
pub fn yager_modified_with_split<T: Scalar>(
    m1: &MassFunction<T>,
    m2: &MassFunction<T>,
) -> Result<(MassFunction<T>, ConflictSplit<T>)> {
    check_map_frame(m1)?;
    check_map_frame(m2)?;
    let mut out: smallvec::SmallVec<[T; 32]> = smallvec![T::zero(); m1.table().len()];
    let mut split = ConflictSplit::default();
    let right = m2.focal_indices();
    for a in m1.focal_indices() {
        let wa = m1.table()[a as usize];
        for &b in &right {
            let w = wa * m2.table()[b as usize];
            let c = (a & b) as usize;
            if c == 0 {
                accumulate(&mut split, Subset(a), Subset(b), w);
            } else {
                out[c] = out[c] + w;
            }
        }
    }
    let v = map::V.index();
    let omega = map::OMEGA.index();
    out[v] = out[v] + split.k_fo;
    out[omega] = out[omega] + split.k_of + split.k_res;
    Ok((MassFunction::from_raw(m1.frame().clone(), out, false), split))
}

/// Counter-keyed cache of mobility specialization matrices.
///
/// Counter values move in fixed steps, so a grid sweep sees only a handful
/// of distinct values.
#[derive(Debug, Default)]
pub struct SpecializationCache<T: Scalar> {
    entries: Vec<(T, SpecializationMatrix<T>)>,
}

impl<T: Scalar> SpecializationCache<T> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn get(&mut self, zeta: T) -> Result<&SpecializationMatrix<T>> {
        let pos = match self.entries.iter().position(|(z, _)| *z == zeta) {
            Some(pos) => pos,
            None => {
                self.entries.push((zeta, SpecializationMatrix::mobility(zeta)?));
                self.entries.len() - 1
            }
        };
        Ok(&self.entries[pos].1)
    }
}

/// Intermediate values of one cell update.
#[derive(Clone, Debug)]
pub struct CellTrace<T: Scalar> {
    pub observed: MassFunction<T>,
    pub split: ConflictSplit<T>,
    pub zeta: T,
    pub specialized: MassFunction<T>,
    pub discounted: MassFunction<T>,
    pub fused: MassFunction<T>,
    /// Conflict split of the final combination.
    pub fused_split: ConflictSplit<T>,
}

/// One cell of [`fuse_step`], keeping every intermediate.
pub fn fuse_cell_traced<T: Scalar>(
    m_prev: &MassFunction<T>,
    zeta: T,
    m_sg: &MassFunction<T>,
    m_pg: &MassFunction<T>,
    params: &FusionParams<T>,
    cache: &mut SpecializationCache<T>,
) -> Result<CellTrace<T>> {
    let observed = inject_prior(m_sg, m_pg, params.use_prior)?;
    let split = split_conflict(m_prev, &observed)?;
    let zeta = update_counter(zeta, m_prev, &split, &params.counter);
    let specialized = specialize(m_prev, cache.get(zeta)?)?;
    let discounted = contextual_discount(&specialized, &params.discount)?;
    let (fused, fused_split) = yager_modified_with_split(&discounted, &observed)?;
    Ok(CellTrace {
        observed,
        split,
        zeta,
        specialized,
        discounted,
        fused: fused.renormalized(),
        fused_split,
    })
}

/// One cell of [`fuse_step`]: the new mass and counter.
pub fn fuse_cell<T: Scalar>(
    m_prev: &MassFunction<T>,
    zeta: T,
    m_sg: &MassFunction<T>,
    m_pg: &MassFunction<T>,
    params: &FusionParams<T>,
    cache: &mut SpecializationCache<T>,
) -> Result<(MassFunction<T>, T)> {
    let trace = fuse_cell_traced(m_prev, zeta, m_sg, m_pg, params, cache)?;
    Ok((trace.fused, trace.zeta))
}

/// Fuses a scan grid (and the prior grid) into the map grid.
///
/// Every output cell depends only on the three input cells at the same
/// index.
pub fn fuse_step<T: Scalar>(
    mg: &EvidentialGrid<T>,
    sg: &EvidentialGrid<T>,
    pg: &EvidentialGrid<T>,
    params: &FusionParams<T>,
) -> Result<EvidentialGrid<T>> {
    let mut out = mg.clone();
    fuse_step_in_place(&mut out, sg, pg, params)?;
    Ok(out)
}

/// [`fuse_step`] writing into the map grid it reads from.
pub fn fuse_step_in_place<T: Scalar>(
    mg: &mut EvidentialGrid<T>,
    sg: &EvidentialGrid<T>,
    pg: &EvidentialGrid<T>,
    params: &FusionParams<T>,
) -> Result<()> {
    if mg.spec() != sg.spec() || mg.spec() != pg.spec() {
        return Err(Error::GridMismatch);
    }
    for (grid, expected) in [(&*mg, map_frame()), (sg, scan_frame()), (pg, map_frame())] {
        if !same_frame(grid.frame(), &expected) {
            return Err(Error::FrameMismatch {
                left: grid.frame().to_string(),
                right: expected.to_string(),
            });
        }
    }
    let mut cache = SpecializationCache::new();
    let lean = LeanStep::new(params);
    for k in 0..mg.spec().cell_count() {
        let mut prev = [T::zero(); 32];
        prev.copy_from_slice(mg.weights_at(k));
        let (fused, zeta) = lean.cell(&prev, mg.zeta_at(k), sg.weights_at(k), pg.weights_at(k), &mut cache)?;
        mg.weights_at_mut(k).copy_from_slice(&fused);
        mg.set_zeta_at(k, zeta);
    }
    Ok(())
}

/// Dense map-frame table.
type Dense<T> = [T; 32];

/// The per-cell update on plain tables. Every sum runs in the same order
/// as the [`MassFunction`] operators, so results are bit-identical to
/// [`fuse_cell`].
struct LeanStep<'a, T: Scalar> {
    params: &'a FusionParams<T>,
    images: [usize; 4],
    // focal (index, weight) pairs of each elementary discount mass
    elementary: Vec<SmallVec<[(u32, T); 32]>>,
}

impl<'a, T: Scalar> LeanStep<'a, T> {
    fn new(params: &'a FusionParams<T>) -> Self {
        let r = refining();
        let images = [0, 1, 2, 3].map(|a| r.apply(Subset(a)).index());
        let elementary = params
            .discount
            .elementary_masses()
            .iter()
            .map(|m| focal(m.table()))
            .collect();
        Self {
            params,
            images,
            elementary,
        }
    }

    fn cell(
        &self,
        prev: &Dense<T>,
        zeta: T,
        sg: &[T],
        pg: &[T],
        cache: &mut SpecializationCache<T>,
    ) -> Result<(Dense<T>, T)> {
        let observed = self.observed(sg, pg)?;
        let observed_focal = focal(&observed);

        let mut split = ConflictSplit::default();
        for (a, wa) in focal(prev) {
            for &(b, wb) in &observed_focal {
                if a & b == 0 {
                    accumulate(&mut split, Subset(a), Subset(b), wa * wb);
                }
            }
        }
        let occupied = (0..32u32)
            .filter(|a| *a != 0 && Subset(*a).is_subset_of(map::OCCUPIED))
            .fold(T::zero(), |acc, a| acc + prev[a as usize]);
        let zeta = counter_step(zeta, occupied, &split, &self.params.counter);

        let s = cache.get(zeta)?;
        let mut current = [T::zero(); 32];
        for (b, w) in prev.iter().enumerate() {
            if *w == T::zero() {
                continue;
            }
            for &(a, share) in s.column(b) {
                current[a as usize] = current[a as usize] + share * *w;
            }
        }

        for block in &self.elementary {
            let mut next = [T::zero(); 32];
            for (b, wb) in current.iter().enumerate() {
                if *wb == T::zero() {
                    continue;
                }
                for &(c, wc) in block {
                    let a = b | c as usize;
                    next[a] = next[a] + *wb * wc;
                }
            }
            current = next;
        }

        let mut fused = [T::zero(); 32];
        let mut k = ConflictSplit::default();
        for (a, wa) in focal(&current) {
            for &(b, wb) in &observed_focal {
                let w = wa * wb;
                let c = (a & b) as usize;
                if c == 0 {
                    accumulate(&mut k, Subset(a), Subset(b), w);
                } else {
                    fused[c] = fused[c] + w;
                }
            }
        }
        let v = map::V.index();
        let omega = map::OMEGA.index();
        fused[v] = fused[v] + k.k_fo;
        fused[omega] = fused[omega] + k.k_of + k.k_res;
        let total = fused.iter().copied().fold(T::zero(), |acc, w| acc + w);
        if (total - T::one()).abs() > T::renormalize_threshold() && total > T::zero() {
            for w in fused.iter_mut() {
                *w = *w / total;
            }
        }
        Ok((fused, zeta))
    }

    fn observed(&self, sg: &[T], pg: &[T]) -> Result<Dense<T>> {
        let mut refined = [T::zero(); 32];
        for (a, w) in sg.iter().enumerate() {
            if *w != T::zero() {
                refined[self.images[a]] = refined[self.images[a]] + *w;
            }
        }
        if !self.params.use_prior {
            return Ok(refined);
        }
        let mut conj = [T::zero(); 32];
        let right = focal(pg);
        for (b, wb) in refined.iter().enumerate() {
            if *wb == T::zero() {
                continue;
            }
            for &(c, wc) in &right {
                let a = b & c as usize;
                conj[a] = conj[a] + *wb * wc;
            }
        }
        let conflict = conj[0];
        if conflict >= T::one() - T::total_conflict_margin() {
            return Err(Error::TotalConflict {
                conflict: conflict.to_f64().unwrap_or(f64::NAN),
            });
        }
        let scale = T::one() - conflict;
        conj[0] = T::zero();
        for w in conj.iter_mut().skip(1) {
            *w = *w / scale;
        }
        Ok(conj)
    }
}

fn focal<T: Scalar>(table: &[T]) -> SmallVec<[(u32, T); 32]> {
    let mut out = SmallVec::new();
    for (k, w) in table.iter().enumerate() {
        if *w > T::zero() {
            out.push((k as u32, *w));
        }
    }
    out
}
