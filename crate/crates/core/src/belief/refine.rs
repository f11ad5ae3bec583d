use std::sync::Arc;

use smallvec::smallvec;

use super::frame::{map, map_frame, same_frame, scan, scan_frame, Frame, Subset};
use super::mass::{MassFunction, Table};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Maps each element of a coarse frame to a nonempty subset of a finer one;
/// subsets extend by union.
#[derive(Clone, Debug)]
pub struct Refining {
    source: Arc<Frame>,
    target: Arc<Frame>,
    images: Vec<Subset>,
}

impl Refining {
    pub fn new(source: Arc<Frame>, target: Arc<Frame>, images: Vec<Subset>) -> Result<Self> {
        if images.len() != source.len() {
            return Err(Error::InvalidParameter(format!(
                "refining needs {} images, got {}",
                source.len(),
                images.len()
            )));
        }
        let mut seen = Subset::EMPTY;
        for (e, image) in images.iter().enumerate() {
            if image.is_empty() || !target.contains_subset(*image) {
                return Err(Error::InvalidParameter(format!(
                    "image of {} must be a nonempty subset of {target}",
                    source.labels()[e]
                )));
            }
            if !seen.intersection(*image).is_empty() {
                return Err(Error::InvalidParameter("refining images overlap".into()));
            }
            seen = seen.union(*image);
        }
        Ok(Self { source, target, images })
    }

    /// `{F} -> {F}`, `{O} -> {C, N, S, V}`.
    pub fn scan_to_map() -> Self {
        let mut images = vec![Subset::EMPTY; 2];
        images[scan::FREE] = map::F;
        images[scan::OCCUPIED] = map::OCCUPIED;
        Self::new(scan_frame(), map_frame(), images).expect("valid refining")
    }

    pub fn source(&self) -> &Arc<Frame> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Frame> {
        &self.target
    }

    /// Image of a source subset: union of its elements' images.
    pub fn apply(&self, subset: Subset) -> Subset {
        subset
            .elements()
            .fold(Subset::EMPTY, |acc, e| acc.union(self.images[e]))
    }
}

/// Carries each focal set `A` of `m` to `r(A)` on the finer frame.
pub fn refine<T: Scalar>(m: &MassFunction<T>, r: &Refining) -> Result<MassFunction<T>> {
    if !same_frame(m.frame(), &r.source) {
        return Err(Error::FrameMismatch {
            left: m.frame().to_string(),
            right: r.source.to_string(),
        });
    }
    let mut table: Table<T> = smallvec![T::zero(); r.target.power_set_size()];
    for (a, w) in m.table().iter().enumerate() {
        if *w == T::zero() {
            continue;
        }
        let image = r.apply(Subset(a as u32)).index();
        table[image] = table[image] + *w;
    }
    Ok(MassFunction::from_raw(r.target.clone(), table, m.allows_empty()))
}
