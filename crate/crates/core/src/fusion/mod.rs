//! The multi-layer pipeline.
//!
//! Certainties are merged into a mass `δ` over subsets of the evidence, an
//! [`Allocator`] moves the mass of each subset onto an open set (`δ_τ`), and a
//! [`JustificationFrame`] keeps only acceptable arguments, renormalizing what
//! it captures (`δ_J`). Belief in a proposition is the `δ_J` mass of the
//! arguments inside it.
//!
//! All masses are carried as integers over the common denominator
//! `∏ den(p_i)`, so every sum is exact and independent of evaluation order.

mod allocator;
mod justification;
mod report;

pub(crate) use report::{cell, format_columns};

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

pub use allocator::{
    allocate, validate_allocators, AllocationCondition, AllocationTable, Allocator, AllocatorReport,
    AllocatorViolation, MAX_ENUMERATED_ITEMS,
};
pub use justification::{justification_frame, JustificationFrame, JustificationKind};
pub use report::{belief_report, BeliefReport, BeliefRow, Proposition};

use crate::error::{Error, Result};
use crate::evidence::{subsets_in_table_order, EvidenceSubset, QuantitativeEvidenceFrame};
use crate::rational::Rational;
use crate::sets::{canonical_key, StateSet, StateUniverse};
use crate::topology::Neighborhoods;

pub(crate) use allocator::ensure_enumerable;

/// Per-item factors `(num, den - num)` and the common denominator.
fn integer_factors(frame: &QuantitativeEvidenceFrame) -> (Vec<(BigInt, BigInt)>, BigInt) {
    let mut denominator = BigInt::from(1u8);
    let factors = frame
        .items()
        .iter()
        .map(|it| {
            let num = it.certainty.numer().clone();
            let den = it.certainty.denom().clone();
            denominator *= &den;
            let rest = &den - &num;
            (num, rest)
        })
        .collect();
    (factors, denominator)
}

/// Calls `visit(subset_mask, δ(subset) · denominator)` for every evidence subset.
fn for_each_weighted_subset(factors: &[(BigInt, BigInt)], visit: &mut impl FnMut(u64, &BigInt)) {
    fn walk(k: usize, bits: u64, weight: &BigInt, factors: &[(BigInt, BigInt)], visit: &mut impl FnMut(u64, &BigInt)) {
        if k == factors.len() {
            visit(bits, weight);
            return;
        }
        let (inside, outside) = &factors[k];
        walk(k + 1, bits, &(weight * outside), factors, visit);
        walk(k + 1, bits | 1 << k, &(weight * inside), factors, visit);
    }
    walk(0, 0, &BigInt::from(1u8), factors, visit);
}

/// `δ(E) = ∏_{E_i ∈ E} p_i · ∏_{E_i ∉ E} (1 − p_i)`.
pub fn delta(frame: &QuantitativeEvidenceFrame, subset: &EvidenceSubset) -> Result<Rational> {
    subset.ensure_over(frame)?;
    Ok(frame
        .items()
        .iter()
        .enumerate()
        .map(|(k, it)| {
            if subset.contains(k) {
                it.certainty.clone()
            } else {
                Rational::one() - &it.certainty
            }
        })
        .fold(Rational::one(), |acc, x| acc * x))
}

/// `δ` over every evidence subset, in table order (size, then item index).
pub fn delta_table(frame: &QuantitativeEvidenceFrame) -> Result<Vec<(EvidenceSubset, Rational)>> {
    ensure_enumerable(frame)?;
    let (factors, denominator) = integer_factors(frame);
    let mut values = vec![BigInt::zero(); 1 << frame.len()];
    for_each_weighted_subset(&factors, &mut |bits, w| values[bits as usize] = w.clone());
    Ok(subsets_in_table_order(frame.len())
        .into_iter()
        .map(|s| {
            let v = Rational::new(values[s.bits() as usize].clone(), denominator.clone());
            (s, v)
        })
        .collect())
}

/// `δ_τ` for one allocator: the mass each open receives.
#[derive(Clone, Debug)]
pub struct MassAllocation {
    universe: StateUniverse,
    neighborhoods: Neighborhoods,
    allocator: String,
    denominator: BigInt,
    /// Scaled mass per open image; only non-zero entries.
    weights: BTreeMap<u64, BigInt>,
}

impl MassAllocation {
    pub fn new(frame: &QuantitativeEvidenceFrame, allocator: &Allocator) -> Result<Self> {
        ensure_enumerable(frame)?;
        allocator.ensure_over(frame)?;
        let (factors, denominator) = integer_factors(frame);
        let contents = frame.content_masks();
        let full = frame.universe().full_mask();
        let neighborhoods = frame.neighborhoods();
        let mut weights: BTreeMap<u64, BigInt> = BTreeMap::new();
        for_each_weighted_subset(&factors, &mut |bits, w| {
            let image = allocator.image_mask(&contents, full, bits);
            *weights.entry(image).or_default() += w;
        });
        // Mass landing outside the topology is not a δ_τ value.
        weights.retain(|&image, w| neighborhoods.is_open(image) && !w.is_zero());
        Ok(MassAllocation {
            universe: frame.universe().clone(),
            neighborhoods,
            allocator: allocator.label().to_string(),
            denominator,
            weights,
        })
    }

    pub fn allocator(&self) -> &str {
        &self.allocator
    }

    fn ratio(&self, numer: BigInt, denom: &BigInt) -> Rational {
        Rational::new(numer, denom.clone())
    }

    pub fn delta_tau(&self, t: &StateSet) -> Result<Rational> {
        self.universe.ensure_same(t.universe())?;
        Ok(self.delta_tau_mask(t.bits()))
    }

    pub(crate) fn delta_tau_mask(&self, t: u64) -> Rational {
        match self.weights.get(&t) {
            Some(w) => self.ratio(w.clone(), &self.denominator),
            None => Rational::zero(),
        }
    }

    /// Opens with positive `δ_τ`, canonically ordered.
    pub fn focal_elements(&self) -> Vec<(StateSet, Rational)> {
        let mut out: Vec<(StateSet, Rational)> = self
            .weights
            .iter()
            .map(|(&t, w)| (self.universe.from_mask(t), self.ratio(w.clone(), &self.denominator)))
            .collect();
        out.sort_by_key(|(s, _)| canonical_key(s.bits()));
        out
    }

    fn check(&self, j: &JustificationFrame) -> Result<()> {
        if self.universe.same_as(j.universe()) && self.neighborhoods == *j.neighborhoods() {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }

    fn captured(&self, j: &JustificationFrame) -> Result<BigInt> {
        self.check(j)?;
        let total: BigInt = self
            .weights
            .iter()
            .filter(|(&t, _)| j.contains_mask(t))
            .map(|(_, w)| w)
            .sum();
        if total.is_zero() {
            return Err(Error::DegenerateNormalization(self.allocator.clone()));
        }
        Ok(total)
    }

    /// `Σ_{T ∈ J} δ_τ(T)`.
    pub fn normalization_factor(&self, j: &JustificationFrame) -> Result<Rational> {
        let captured = self.captured(j)?;
        Ok(self.ratio(captured, &self.denominator))
    }

    pub fn delta_j(&self, j: &JustificationFrame, t: &StateSet) -> Result<Rational> {
        self.universe.ensure_same(t.universe())?;
        let captured = self.captured(j)?;
        Ok(self.delta_j_mask(j, &captured, t.bits()))
    }

    fn delta_j_mask(&self, j: &JustificationFrame, captured: &BigInt, t: u64) -> Rational {
        match self.weights.get(&t) {
            Some(w) if j.contains_mask(t) => self.ratio(w.clone(), captured),
            _ => Rational::zero(),
        }
    }

    /// `δ_J` as a map over its focal sets, canonically ordered.
    pub fn delta_j_focal(&self, j: &JustificationFrame) -> Result<Vec<(StateSet, Rational)>> {
        let captured = self.captured(j)?;
        let mut out: Vec<(StateSet, Rational)> = self
            .weights
            .iter()
            .filter(|(&t, _)| j.contains_mask(t))
            .map(|(&t, w)| (self.universe.from_mask(t), self.ratio(w.clone(), &captured)))
            .collect();
        out.sort_by_key(|(s, _)| canonical_key(s.bits()));
        Ok(out)
    }

    /// `Bel_J(P)`: the `δ_J` mass of justification-frame members inside `P`.
    pub fn bel(&self, j: &JustificationFrame, p: &StateSet) -> Result<Rational> {
        self.universe.ensure_same(p.universe())?;
        let captured = self.captured(j)?;
        Ok(self.bel_with(j, &captured, p.bits()))
    }

    fn bel_with(&self, j: &JustificationFrame, captured: &BigInt, p: u64) -> Rational {
        let inside: BigInt = self
            .weights
            .iter()
            .filter(|(&t, _)| t & !p == 0 && j.contains_mask(t))
            .map(|(_, w)| w)
            .sum();
        self.ratio(inside, captured)
    }

    /// Belief in every subset of the universe, indexed by mask. Only for
    /// small universes.
    pub fn bel_all(&self, j: &JustificationFrame) -> Result<Vec<Rational>> {
        assert!(
            self.universe.len() <= 20,
            "refusing to tabulate 2^{} beliefs",
            self.universe.len()
        );
        let captured = self.captured(j)?;
        Ok((0..=self.universe.full_mask())
            .map(|p| self.bel_with(j, &captured, p))
            .collect())
    }
}

/// `δ_τ(f, t)`: summed `δ` of every evidence subset the allocator sends to `t`.
pub fn delta_tau(frame: &QuantitativeEvidenceFrame, allocator: &Allocator, t: &StateSet) -> Result<Rational> {
    MassAllocation::new(frame, allocator)?.delta_tau(t)
}

pub fn normalization_factor(
    frame: &QuantitativeEvidenceFrame,
    allocator: &Allocator,
    j: &JustificationFrame,
) -> Result<Rational> {
    j.ensure_over(frame)?;
    MassAllocation::new(frame, allocator)?.normalization_factor(j)
}

/// `δ_J(f, t)`: `δ_τ(f, t)` renormalized over the justification frame, or 0
/// when `t` is not a member.
pub fn delta_j(
    frame: &QuantitativeEvidenceFrame,
    allocator: &Allocator,
    j: &JustificationFrame,
    t: &StateSet,
) -> Result<Rational> {
    j.ensure_over(frame)?;
    MassAllocation::new(frame, allocator)?.delta_j(j, t)
}

/// The multi-layer belief `Bel_J(f, P)`.
pub fn bel(
    frame: &QuantitativeEvidenceFrame,
    allocator: &Allocator,
    j: &JustificationFrame,
    p: &StateSet,
) -> Result<Rational> {
    j.ensure_over(frame)?;
    MassAllocation::new(frame, allocator)?.bel(j, p)
}
