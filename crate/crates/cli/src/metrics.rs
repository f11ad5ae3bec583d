//! Confusion matrices of pignistic decisions against ground truth.

use evigrid_core::belief::{argmax_class_with_margin, pignistic};
use evigrid_core::sim::Label;
use evigrid_core::Grid64;
use serde::Serialize;

/// Number of decision columns: five classes plus the tie bucket.
pub const DECISIONS: usize = 6;
/// Column receiving cells whose pignistic argmax is not unique.
pub const TIE: usize = 5;

pub const DECISION_NAMES: [&str; DECISIONS] = ["F", "C", "N", "S", "V", "tie"];

/// Rows are ground-truth labels, columns pignistic decisions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Confusion(pub [[u64; DECISIONS]; 5]);

impl Confusion {
    pub fn record(&mut self, truth: Label, decision: usize) {
        self.0[truth.index()][decision] += 1;
    }

    pub fn add(&mut self, other: &Confusion) {
        for (row, other) in self.0.iter_mut().zip(&other.0) {
            for (c, o) in row.iter_mut().zip(other) {
                *c += o;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn row_total(&self, truth: Label) -> u64 {
        self.0[truth.index()].iter().sum()
    }

    pub fn column_total(&self, decision: usize) -> u64 {
        self.0.iter().map(|row| row[decision]).sum()
    }

    pub fn get(&self, truth: Label, decision: usize) -> u64 {
        self.0[truth.index()][decision]
    }

    /// Fraction of `truth` cells decided as that class; `None` without any.
    pub fn recall(&self, truth: Label) -> Option<f64> {
        let n = self.row_total(truth);
        (n > 0).then(|| self.get(truth, truth.index()) as f64 / n as f64)
    }

    /// Fraction of cells decided as `class` whose truth is `class`.
    pub fn precision(&self, class: Label) -> Option<f64> {
        let n = self.column_total(class.index());
        (n > 0).then(|| self.get(class, class.index()) as f64 / n as f64)
    }
}

/// A class is only decided when its pignistic probability beats every
/// other class by more than this.
pub const DECISION_MARGIN: f64 = 1e-3;

/// Pignistic decision of a cell: class index, or [`TIE`].
pub fn decide(grid: &Grid64, i: usize, j: usize) -> usize {
    let m = grid.mass(i, j).expect("cell in bounds");
    let betp = pignistic(&m).expect("map cells are normalized");
    argmax_class_with_margin(&betp, DECISION_MARGIN).unwrap_or(TIE)
}

/// Decision for every cell, row-major.
pub fn decisions(grid: &Grid64) -> Vec<usize> {
    grid.spec().cells().map(|(i, j)| decide(grid, i, j)).collect()
}

/// Confusion over the cells selected by `mask`.
pub fn confusion(decisions: &[usize], truth: &[Label], mask: &[bool]) -> Confusion {
    let mut c = Confusion::default();
    for ((d, t), m) in decisions.iter().zip(truth).zip(mask) {
        if *m {
            c.record(*t, *d);
        }
    }
    c
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameMetrics {
    pub frame: usize,
    pub t: f64,
    /// Cells touched by a beam in this or any earlier frame.
    pub observed_cells: u64,
    /// Cells touched by a beam in this frame.
    pub current_cells: u64,
    /// Over every observed cell.
    pub confusion: Confusion,
    /// Over the cells touched in this frame only.
    pub current_confusion: Confusion,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassScores {
    pub label: &'static str,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub truth_count: u64,
    pub decided_count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub classes: [&'static str; 5],
    pub decisions: [&'static str; DECISIONS],
    pub frames_evaluated: usize,
    pub frames: Vec<FrameMetrics>,
    pub aggregate: Confusion,
    pub scores: Vec<ClassScores>,
    pub tie_count: u64,
    pub total_count: u64,
}

impl EvalReport {
    pub fn from_frames(frames: Vec<FrameMetrics>) -> Self {
        let mut aggregate = Confusion::default();
        for f in &frames {
            aggregate.add(&f.confusion);
        }
        let scores = Label::ALL
            .iter()
            .map(|l| ClassScores {
                label: l.short_name(),
                precision: aggregate.precision(*l),
                recall: aggregate.recall(*l),
                truth_count: aggregate.row_total(*l),
                decided_count: aggregate.column_total(l.index()),
            })
            .collect();
        Self {
            classes: evigrid_core::belief::map::LABELS,
            decisions: DECISION_NAMES,
            frames_evaluated: frames.len(),
            tie_count: aggregate.column_total(TIE),
            total_count: aggregate.total(),
            frames,
            aggregate,
            scores,
        }
    }

    pub fn recall(&self, label: Label) -> Option<f64> {
        self.aggregate.recall(label)
    }
}
