//! Contextual discounting over a coarsening of the frame.

use std::sync::Arc;

use super::frame::{map, map_frame, same_frame, Frame, Subset};
use super::mass::{disjunctive_combine, MassFunction};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pairwise disjoint blocks covering the whole frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    frame: Arc<Frame>,
    blocks: Vec<Subset>,
}

impl Partition {
    pub fn new(frame: Arc<Frame>, blocks: Vec<Subset>) -> Result<Self> {
        let mut covered = Subset::EMPTY;
        for block in &blocks {
            if block.is_empty() || !frame.contains_subset(*block) {
                return Err(Error::InvalidParameter("partition block empty or outside frame".into()));
            }
            if !covered.intersection(*block).is_empty() {
                return Err(Error::InvalidParameter("partition blocks overlap".into()));
            }
            covered = covered.union(*block);
        }
        if covered != frame.omega() {
            return Err(Error::InvalidParameter("partition does not cover the frame".into()));
        }
        Ok(Self { frame, blocks })
    }

    /// Static `{C, N}`, dynamic `{S, V}` and free `{F}` contexts, in that order.
    pub fn mobility() -> Self {
        Self::new(map_frame(), vec![map::STATIC, map::DYNAMIC, map::FREE_SPACE]).expect("valid partition")
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn blocks(&self) -> &[Subset] {
        &self.blocks
    }
}

/// One discount rate per partition block.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscountRates<T>(Vec<T>);

impl<T: Scalar> DiscountRates<T> {
    pub fn new(rates: Vec<T>) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !(**r >= T::zero() && **r <= T::one())) {
            return Err(Error::InvalidParameter(format!("discount rate {r} outside [0, 1]")));
        }
        Ok(Self(rates))
    }

    pub fn rates(&self) -> &[T] {
        &self.0
    }
}

/// A partition with matching rates, checked once at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextualDiscount<T: Scalar> {
    partition: Partition,
    rates: DiscountRates<T>,
    elementary: Vec<MassFunction<T>>,
}

impl<T: Scalar> ContextualDiscount<T> {
    pub fn new(partition: Partition, rates: DiscountRates<T>) -> Result<Self> {
        if partition.blocks.len() != rates.0.len() {
            return Err(Error::InvalidParameter(format!(
                "{} discount rates for {} partition blocks",
                rates.0.len(),
                partition.blocks.len()
            )));
        }
        let elementary = partition
            .blocks
            .iter()
            .zip(&rates.0)
            .map(|(block, rate)| elementary_mass(&partition.frame, *block, *rate))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            partition,
            rates,
            elementary,
        })
    }

    /// The mobility partition with rates `(static, dynamic, free)`.
    pub fn mobility(alpha_static: T, alpha_dynamic: T, alpha_free: T) -> Result<Self> {
        Self::new(
            Partition::mobility(),
            DiscountRates::new(vec![alpha_static, alpha_dynamic, alpha_free])?,
        )
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn rates(&self) -> &DiscountRates<T> {
        &self.rates
    }

    /// `m_l(block) = rate`, `m_l(empty) = 1 - rate`, per block.
    pub fn elementary_masses(&self) -> &[MassFunction<T>] {
        &self.elementary
    }
}

fn elementary_mass<T: Scalar>(frame: &Arc<Frame>, block: Subset, rate: T) -> Result<MassFunction<T>> {
    MassFunction::from_focal_sets(frame, &[(block, rate), (Subset::EMPTY, T::one() - rate)], true)
}

/// Disjunctive combination of `m` with each block's elementary mass, in
/// partition order. Every rate at zero leaves `m` untouched.
pub fn contextual_discount<T: Scalar>(m: &MassFunction<T>, discount: &ContextualDiscount<T>) -> Result<MassFunction<T>> {
    if !same_frame(m.frame(), &discount.partition.frame) {
        return Err(Error::FrameMismatch {
            left: m.frame().to_string(),
            right: discount.partition.frame.to_string(),
        });
    }
    let mut out = m.clone();
    for elementary in &discount.elementary {
        out = disjunctive_combine(&out, elementary)?;
    }
    Ok(out)
}
