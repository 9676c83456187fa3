//! Finite state universes and their subsets.
//!
//! A [`StateUniverse`] fixes an ordered list of at most 64 state labels; the
//! position of a label is its bit in every [`StateSet`] over that universe.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_STATES: usize = 64;

/// An ordered, duplicate-free list of state labels.
#[derive(Clone)]
pub struct StateUniverse {
    labels: Arc<[String]>,
}

impl StateUniverse {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        if labels.len() > MAX_STATES {
            return Err(Error::TooManyStates(labels.len()));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if label.is_empty() {
                return Err(Error::EmptyLabel);
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(StateUniverse { labels: labels.into() })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Bit mask with one bit per state.
    pub fn full_mask(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet {
            universe: self.clone(),
            bits: 0,
        }
    }

    pub fn full_set(&self) -> StateSet {
        StateSet {
            universe: self.clone(),
            bits: self.full_mask(),
        }
    }

    /// The set of the named states. Repeated names are harmless.
    pub fn set<I, S>(&self, names: I) -> Result<StateSet>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = 0u64;
        for name in names {
            let name = name.as_ref();
            let idx = self
                .index_of(name)
                .ok_or_else(|| Error::UnknownState(name.to_string()))?;
            bits |= 1 << idx;
        }
        Ok(StateSet {
            universe: self.clone(),
            bits,
        })
    }

    /// Wraps a raw mask; bits beyond the universe are cleared.
    pub fn from_mask(&self, bits: u64) -> StateSet {
        StateSet {
            universe: self.clone(),
            bits: bits & self.full_mask(),
        }
    }

    /// Every subset of the universe in increasing mask order. Only sensible
    /// for small universes.
    pub fn all_subsets(&self) -> impl Iterator<Item = StateSet> + '_ {
        assert!(self.len() < 32, "refusing to enumerate 2^{} subsets", self.len());
        (0..=self.full_mask()).map(move |bits| self.from_mask(bits))
    }

    pub fn same_as(&self, other: &StateUniverse) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }

    pub fn ensure_same(&self, other: &StateUniverse) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::UniverseMismatch)
        }
    }

    /// Renders a mask as `{a,b}` in universe order.
    pub fn format_mask(&self, bits: u64) -> String {
        let names: Vec<&str> = members(bits).map(|i| self.labels[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn names_of(&self, bits: u64) -> Vec<String> {
        members(bits).map(|i| self.labels[i].clone()).collect()
    }
}

impl PartialEq for StateUniverse {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for StateUniverse {}

impl fmt::Debug for StateUniverse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

/// Indices of the set bits of `bits`, ascending.
pub fn members(bits: u64) -> impl Iterator<Item = usize> {
    let mut rest = bits;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        }
    })
}

/// Orders masks by cardinality, then numerically.
pub fn canonical_key(bits: u64) -> (u32, u64) {
    (bits.count_ones(), bits)
}

/// A subset of a [`StateUniverse`].
#[derive(Clone)]
pub struct StateSet {
    universe: StateUniverse,
    bits: u64,
}

impl StateSet {
    pub fn universe(&self) -> &StateUniverse {
        &self.universe
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_full(&self) -> bool {
        self.bits == self.universe.full_mask()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.universe.index_of(label).is_some_and(|i| self.bits & (1 << i) != 0)
    }

    pub fn names(&self) -> Vec<String> {
        self.universe.names_of(self.bits)
    }

    pub fn intersection(&self, other: &StateSet) -> Result<StateSet> {
        self.universe.ensure_same(&other.universe)?;
        Ok(self.universe.from_mask(self.bits & other.bits))
    }

    pub fn union(&self, other: &StateSet) -> Result<StateSet> {
        self.universe.ensure_same(&other.universe)?;
        Ok(self.universe.from_mask(self.bits | other.bits))
    }

    pub fn is_subset_of(&self, other: &StateSet) -> Result<bool> {
        is_subset(self, other)
    }

    pub fn complement(&self) -> StateSet {
        self.universe.from_mask(!self.bits)
    }
}

impl PartialEq for StateSet {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits && self.universe == other.universe
    }
}

impl Eq for StateSet {}

impl Hash for StateSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bits.hash(state);
    }
}

impl PartialOrd for StateSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: cardinality first, then mask value.
impl Ord for StateSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        canonical_key(self.bits).cmp(&canonical_key(other.bits))
    }
}

impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.universe.format_mask(self.bits))
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn common_universe(sets: &[StateSet]) -> Result<&StateUniverse> {
    let first = sets.first().ok_or(Error::EmptyEvidenceList)?;
    for s in &sets[1..] {
        first.universe.ensure_same(&s.universe)?;
    }
    Ok(&first.universe)
}

/// Intersection of a non-empty list of sets.
pub fn intersect_all(sets: &[StateSet]) -> Result<StateSet> {
    let universe = common_universe(sets)?;
    let bits = sets.iter().fold(universe.full_mask(), |acc, s| acc & s.bits);
    Ok(universe.from_mask(bits))
}

/// Union of a non-empty list of sets.
pub fn union_all(sets: &[StateSet]) -> Result<StateSet> {
    let universe = common_universe(sets)?;
    let bits = sets.iter().fold(0, |acc, s| acc | s.bits);
    Ok(universe.from_mask(bits))
}

pub fn is_subset(a: &StateSet, b: &StateSet) -> Result<bool> {
    a.universe.ensure_same(&b.universe)?;
    Ok(a.bits & !b.bits == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn car() -> StateUniverse {
        StateUniverse::new(["sp", "dp", "do", "so", "dm", "sm"]).unwrap()
    }

    #[test]
    fn universe_construction() {
        let u = car();
        assert_eq!(u.len(), 6);
        assert_eq!(u.index_of("so"), Some(3));
        assert_eq!(StateUniverse::new(["a"]).unwrap().len(), 1);
        assert_eq!(
            StateUniverse::new(["a", "a"]).unwrap_err(),
            Error::DuplicateLabel("a".into())
        );
        assert_eq!(
            StateUniverse::new(Vec::<String>::new()).unwrap_err(),
            Error::EmptyUniverse
        );
        let many: Vec<String> = (0..65).map(|i| format!("s{i}")).collect();
        assert_eq!(StateUniverse::new(many).unwrap_err(), Error::TooManyStates(65));
        let max: Vec<String> = (0..64).map(|i| format!("s{i}")).collect();
        let u64s = StateUniverse::new(max).unwrap();
        assert_eq!(u64s.full_mask(), u64::MAX);
        assert_eq!(StateUniverse::new([""]).unwrap_err(), Error::EmptyLabel);
    }

    #[test]
    fn state_sets() {
        let u = car();
        let e1 = u.set(["dp", "dm", "do"]).unwrap();
        assert_eq!(e1.len(), 3);
        assert!(e1.contains("do") && !e1.contains("sp"));
        assert_eq!(u.set(["dp", "dp"]).unwrap().len(), 1);
        assert!(u.set(Vec::<&str>::new()).unwrap().is_empty());
        assert_eq!(u.set(["zz"]).unwrap_err(), Error::UnknownState("zz".into()));
        assert_eq!(e1.to_string(), "{dp,do,dm}");
    }

    #[test]
    fn set_algebra_on_car_evidence() {
        let u = car();
        let e1 = u.set(["dp", "dm", "do"]).unwrap();
        let e2 = u.set(["dm", "sm"]).unwrap();
        let e3 = u.set(["dp", "sp"]).unwrap();
        assert_eq!(
            intersect_all(&[e1.clone(), e2.clone()]).unwrap(),
            u.set(["dm"]).unwrap()
        );
        assert_eq!(
            union_all(&[e2.clone(), e3.clone()]).unwrap(),
            u.set(["sp", "dp", "dm", "sm"]).unwrap()
        );
        assert!(intersect_all(&[e2, e3]).unwrap().is_empty());
        assert!(is_subset(&u.set(["dm"]).unwrap(), &e1).unwrap());
        assert_eq!(intersect_all(&[]).unwrap_err(), Error::EmptyEvidenceList);
    }

    #[test]
    fn mismatched_universes_are_rejected() {
        let a = StateUniverse::new(["x", "y"]).unwrap();
        let b = StateUniverse::new(["x", "z"]).unwrap();
        let sa = a.set(["x"]).unwrap();
        let sb = b.set(["x"]).unwrap();
        assert_eq!(
            intersect_all(&[sa.clone(), sb.clone()]).unwrap_err(),
            Error::UniverseMismatch
        );
        assert_eq!(
            union_all(&[sa.clone(), sb.clone()]).unwrap_err(),
            Error::UniverseMismatch
        );
        assert_eq!(is_subset(&sa, &sb).unwrap_err(), Error::UniverseMismatch);
        // Structurally identical universes are interchangeable.
        let a2 = StateUniverse::new(["x", "y"]).unwrap();
        assert!(is_subset(&sa, &a2.full_set()).unwrap());
    }

    fn universe_and_sets() -> impl Strategy<Value = (StateUniverse, u64, u64, u64)> {
        (1usize..=8).prop_flat_map(|n| {
            let u = StateUniverse::new((0..n).map(|i| format!("s{i}"))).unwrap();
            let full = u.full_mask();
            (Just(u), 0..=full, 0..=full, 0..=full)
        })
    }

    proptest! {
        #[test]
        fn lattice_laws((u, a, b, c) in universe_and_sets()) {
            let (a, b, c) = (u.from_mask(a), u.from_mask(b), u.from_mask(c));
            let i = |x: &StateSet, y: &StateSet| x.intersection(y).unwrap();
            let un = |x: &StateSet, y: &StateSet| x.union(y).unwrap();
            prop_assert_eq!(i(&i(&a, &b), &c), i(&a, &i(&b, &c)));
            prop_assert_eq!(un(&un(&a, &b), &c), un(&a, &un(&b, &c)));
            prop_assert_eq!(i(&a, &b), i(&b, &a));
            prop_assert_eq!(un(&a, &b), un(&b, &a));
            prop_assert_eq!(i(&a, &a), a.clone());
            prop_assert_eq!(un(&a, &a), a.clone());
        }

        #[test]
        fn subset_is_partial_order((u, a, b, c) in universe_and_sets()) {
            let (a, b, c) = (u.from_mask(a), u.from_mask(b), u.from_mask(c));
            let sub = |x: &StateSet, y: &StateSet| is_subset(x, y).unwrap();
            prop_assert!(sub(&a, &a));
            if sub(&a, &b) && sub(&b, &a) {
                prop_assert_eq!(&a, &b);
            }
            if sub(&a, &b) && sub(&b, &c) {
                prop_assert!(sub(&a, &c));
            }
            // Brute-force membership agrees with the mask test.
            let by_members = a.names().iter().all(|n| b.contains(n));
            prop_assert_eq!(sub(&a, &b), by_members);
        }
    }
}
