//! Frames of discernment and subset bitmasks.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

/// Largest supported frame size. Mass tables are dense over `2^n` subsets.
pub const MAX_FRAME_SIZE: usize = 16;

/// A subset of a frame, bit `i` set when element `i` belongs to it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(pub u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn singleton(element: usize) -> Self {
        Subset(1 << element)
    }

    pub fn from_elements(elements: &[usize]) -> Self {
        Subset(elements.iter().fold(0, |acc, &e| acc | (1 << e)))
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, element: usize) -> bool {
        self.0 & (1 << element) != 0
    }

    #[inline]
    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    #[inline]
    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    #[inline]
    pub fn without(self, element: usize) -> Subset {
        Subset(self.0 & !(1 << element))
    }

    #[inline]
    pub fn cardinality(self) -> u32 {
        self.0.count_ones()
    }

    /// Element indices in ascending order.
    pub fn elements(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |e| bits & (1 << e) != 0)
    }
}

/// An ordered list of mutually exclusive hypotheses.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    labels: Vec<String>,
}

impl Frame {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Arc<Frame>> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() || labels.len() > MAX_FRAME_SIZE {
            return Err(Error::InvalidFrame(format!(
                "size {} outside [1, {MAX_FRAME_SIZE}]",
                labels.len()
            )));
        }
        for (k, label) in labels.iter().enumerate() {
            if labels[..k].contains(label) {
                return Err(Error::InvalidFrame(format!("duplicate label {label:?}")));
            }
        }
        Ok(Arc::new(Frame { labels }))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of subsets, `2^n`.
    pub fn power_set_size(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn omega(&self) -> Subset {
        Subset((1u32 << self.labels.len()) - 1)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Subset from element labels; unknown labels are an error.
    pub fn subset(&self, labels: &[&str]) -> Result<Subset> {
        labels.iter().try_fold(Subset::EMPTY, |acc, label| {
            self.index_of(label)
                .map(|e| acc.union(Subset::singleton(e)))
                .ok_or_else(|| Error::InvalidFrame(format!("unknown element {label:?}")))
        })
    }

    pub fn contains_subset(&self, subset: Subset) -> bool {
        subset.0 < (1u32 << self.labels.len())
    }

    pub fn describe(&self, subset: Subset) -> String {
        if subset.is_empty() {
            return "{}".to_string();
        }
        let names: Vec<&str> = subset.elements().map(|e| self.labels[e].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Frame{:?}", self.labels)
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(","))
    }
}

/// True when both handles name the same frame.
pub fn same_frame(a: &Arc<Frame>, b: &Arc<Frame>) -> bool {
    Arc::ptr_eq(a, b) || a.labels == b.labels
}

/// The scan frame `{F, O}`.
pub mod scan {
    use super::Subset;

    pub const FREE: usize = 0;
    pub const OCCUPIED: usize = 1;

    pub const F: Subset = Subset(1 << FREE);
    pub const O: Subset = Subset(1 << OCCUPIED);
    pub const OMEGA: Subset = Subset(0b11);
}

/// The map frame `{F, C, N, S, V}`: free space, mapped infrastructure,
/// unmapped infrastructure, stopped objects, moving objects.
pub mod map {
    use super::Subset;

    pub const FREE: usize = 0;
    pub const MAPPED: usize = 1;
    pub const UNMAPPED: usize = 2;
    pub const STOPPED: usize = 3;
    pub const MOVING: usize = 4;

    pub const F: Subset = Subset(1 << FREE);
    pub const C: Subset = Subset(1 << MAPPED);
    pub const N: Subset = Subset(1 << UNMAPPED);
    pub const S: Subset = Subset(1 << STOPPED);
    pub const V: Subset = Subset(1 << MOVING);
    pub const OMEGA: Subset = Subset(0b11111);

    /// Everything that is not free space, `{C, N, S, V}`.
    pub const OCCUPIED: Subset = Subset(0b11110);

    /// Building context `{C}`.
    pub const BUILDING: Subset = C;
    /// Road context `{F, S, V}`.
    pub const ROAD: Subset = Subset(0b11001);
    /// Neither building nor road `{F, N, S, V}`.
    pub const OTHER: Subset = Subset(0b11101);

    pub const STATIC: Subset = Subset(0b00110);
    pub const DYNAMIC: Subset = Subset(0b11000);
    pub const FREE_SPACE: Subset = F;

    pub const LABELS: [&str; 5] = ["F", "C", "N", "S", "V"];
}

/// Shared handle to `{F, O}`.
pub fn scan_frame() -> Arc<Frame> {
    static FRAME: OnceLock<Arc<Frame>> = OnceLock::new();
    FRAME
        .get_or_init(|| Frame::new(["F", "O"]).expect("valid frame"))
        .clone()
}

/// Shared handle to `{F, C, N, S, V}`.
pub fn map_frame() -> Arc<Frame> {
    static FRAME: OnceLock<Arc<Frame>> = OnceLock::new();
    FRAME
        .get_or_init(|| Frame::new(map::LABELS).expect("valid frame"))
        .clone()
}
