//! Evidential topologies generated from a subbasis of evidence sets.
//!
//! On a finite space every point `x` has a smallest open neighbourhood: the
//! intersection of all subbasis members containing `x` (or the whole space
//! when none does). The generated topology is exactly the family of unions of
//! these neighbourhoods, which is how [`generate_topology`] enumerates it.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::sets::{canonical_key, members, StateSet, StateUniverse};

/// Smallest open neighbourhood of every state, for the topology generated by
/// a list of subbasis masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neighborhoods {
    full: u64,
    cells: Vec<u64>,
}

impl Neighborhoods {
    pub fn from_masks(universe: &StateUniverse, subbasis: &[u64]) -> Self {
        let full = universe.full_mask();
        let cells = (0..universe.len())
            .map(|x| {
                let bit = 1u64 << x;
                subbasis.iter().filter(|&&b| b & bit != 0).fold(full, |acc, &b| acc & b)
            })
            .collect();
        Neighborhoods { full, cells }
    }

    /// The smallest open set containing state `x`.
    pub fn cell(&self, x: usize) -> u64 {
        self.cells[x]
    }

    pub fn full(&self) -> u64 {
        self.full
    }

    pub fn is_open(&self, bits: u64) -> bool {
        bits & !self.full == 0 && members(bits).all(|x| self.cells[x] & !bits == 0)
    }

    /// Minimal non-empty opens, canonically ordered.
    pub fn minimal_opens(&self) -> Vec<u64> {
        let mut distinct: Vec<u64> = self.cells.clone();
        distinct.sort_unstable_by_key(|&c| canonical_key(c));
        distinct.dedup();
        let minimal: Vec<u64> = distinct
            .iter()
            .copied()
            .filter(|&c| !distinct.iter().any(|&d| d != c && d & !c == 0))
            .collect();
        minimal
    }

    /// Dense means meeting every non-empty open; every non-empty open
    /// contains a minimal one, so checking those suffices.
    pub fn is_dense(&self, bits: u64) -> bool {
        self.cells.iter().all(|&c| c & bits != 0)
    }

    /// Every open set, canonically ordered. Output-sensitive: cost grows
    /// with the number of opens, which can reach `2^|S|`.
    pub fn enumerate_opens(&self) -> Vec<u64> {
        let mut distinct = self.cells.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let mut seen: HashSet<u64> = HashSet::from([0u64, self.full]);
        let mut opens = vec![0u64, self.full];
        if self.full == 0 {
            opens.pop();
        }
        for &cell in &distinct {
            let snapshot = opens.len();
            for k in 0..snapshot {
                let candidate = opens[k] | cell;
                if seen.insert(candidate) {
                    opens.push(candidate);
                }
            }
        }
        opens.sort_unstable_by_key(|&o| canonical_key(o));
        opens
    }
}

/// A topology on a finite state universe, with its opens listed explicitly.
#[derive(Clone, Debug)]
pub struct Topology {
    universe: StateUniverse,
    opens: Vec<u64>,
    neighborhoods: Neighborhoods,
}

impl Topology {
    pub fn universe(&self) -> &StateUniverse {
        &self.universe
    }

    pub fn neighborhoods(&self) -> &Neighborhoods {
        &self.neighborhoods
    }

    /// Opens as raw masks in canonical order.
    pub fn open_masks(&self) -> &[u64] {
        &self.opens
    }

    pub fn opens(&self) -> Vec<StateSet> {
        self.opens.iter().map(|&o| self.universe.from_mask(o)).collect()
    }

    pub fn len(&self) -> usize {
        self.opens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opens.is_empty()
    }

    pub fn contains(&self, set: &StateSet) -> Result<bool> {
        self.universe.ensure_same(set.universe())?;
        Ok(self.neighborhoods.is_open(set.bits()))
    }
}

/// The smallest topology on `universe` containing every subbasis member.
pub fn generate_topology(universe: &StateUniverse, subbasis: &[StateSet]) -> Result<Topology> {
    for s in subbasis {
        universe.ensure_same(s.universe())?;
    }
    let masks: Vec<u64> = subbasis.iter().map(StateSet::bits).collect();
    Ok(topology_from_masks(universe, &masks))
}

pub(crate) fn topology_from_masks(universe: &StateUniverse, subbasis: &[u64]) -> Topology {
    let neighborhoods = Neighborhoods::from_masks(universe, subbasis);
    let opens = neighborhoods.enumerate_opens();
    Topology {
        universe: universe.clone(),
        opens,
        neighborhoods,
    }
}

/// Whether `p` meets every non-empty open of `t`.
pub fn is_dense(p: &StateSet, t: &Topology) -> Result<bool> {
    t.universe.ensure_same(p.universe())?;
    Ok(t.neighborhoods.is_dense(p.bits()))
}

/// Whether evidence `e` supports proposition `p`, i.e. `e ⊆ p`.
pub fn supports(e: &StateSet, p: &StateSet) -> Result<bool> {
    e.is_subset_of(p)
}

/// All non-empty opens of `t` contained in `p`, canonically ordered.
pub fn arguments_for(t: &Topology, p: &StateSet) -> Result<Vec<StateSet>> {
    t.universe.ensure_same(p.universe())?;
    let bits = p.bits();
    Ok(t.opens
        .iter()
        .filter(|&&o| o != 0 && o & !bits == 0)
        .map(|&o| t.universe.from_mask(o))
        .collect())
}

/// A maximal family of evidence sets with non-empty intersection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FipFamily {
    /// Bit `k` set when evidence item `k` belongs to the family.
    pub members: u64,
    /// The (non-empty) intersection of the family.
    pub intersection: u64,
}

/// Maximal finite-intersection-property families of `sets`, by member mask.
///
/// A family with a common point `x` is contained in the family of all sets
/// containing `x`, which still meets at `x`. So the maximal families are the
/// inclusion-maximal "sets through `x`" families.
pub(crate) fn maximal_fip_masks(sets: &[u64]) -> Vec<FipFamily> {
    debug_assert!(sets.len() <= 64);
    let covered = sets.iter().fold(0u64, |acc, &s| acc | s);
    let mut families: Vec<FipFamily> = Vec::new();
    for x in members(covered) {
        let bit = 1u64 << x;
        let mut fam = 0u64;
        let mut inter = u64::MAX;
        for (k, &s) in sets.iter().enumerate() {
            if s & bit != 0 {
                fam |= 1 << k;
                inter &= s;
            }
        }
        if !families.iter().any(|f| f.members == fam) {
            families.push(FipFamily {
                members: fam,
                intersection: inter,
            });
        }
    }
    let maximal: Vec<FipFamily> = families
        .iter()
        .filter(|f| {
            !families
                .iter()
                .any(|g| g.members != f.members && f.members & !g.members == 0)
        })
        .cloned()
        .collect();
    let mut maximal = maximal;
    maximal.sort_unstable_by_key(|f| f.members);
    maximal
}

/// Union of the intersections of the maximal FIP families of `sets`.
pub(crate) fn min_dense_mask(sets: &[u64]) -> u64 {
    maximal_fip_masks(sets).iter().fold(0, |acc, f| acc | f.intersection)
}

fn evidence_masks(evidence: &[StateSet]) -> Result<Vec<u64>> {
    let first = evidence.first().ok_or(Error::EmptyEvidenceList)?;
    for e in &evidence[1..] {
        first.universe().ensure_same(e.universe())?;
    }
    Ok(evidence.iter().map(StateSet::bits).collect())
}

/// All maximal subfamilies of `evidence` with non-empty intersection, each
/// given as ascending item indices. Families are ordered by their index mask.
pub fn maximal_fip_families(evidence: &[StateSet]) -> Result<Vec<Vec<usize>>> {
    let masks = evidence_masks(evidence)?;
    if masks.len() > 64 {
        return Err(Error::CapacityExceeded {
            items: masks.len(),
            max: 64,
        });
    }
    Ok(maximal_fip_masks(&masks)
        .into_iter()
        .map(|f| members(f.members).collect())
        .collect())
}

/// The smallest dense open of the topology generated by `evidence`.
pub fn min_dense(evidence: &[StateSet]) -> Result<StateSet> {
    let masks = evidence_masks(evidence)?;
    if masks.len() > 64 {
        return Err(Error::CapacityExceeded {
            items: masks.len(),
            max: 64,
        });
    }
    Ok(evidence[0].universe().from_mask(min_dense_mask(&masks)))
}
