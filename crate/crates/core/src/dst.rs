//! Classical Dempster-Shafer machinery and the qualitative belief operator
//! of topological evidence models.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evidence::QuantitativeEvidenceFrame;
use crate::rational::Rational;
use crate::sets::{canonical_key, StateSet, StateUniverse};

/// A basic probability assignment: non-zero masses on non-empty sets,
/// summing to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicProbabilityAssignment {
    universe: StateUniverse,
    focal: BTreeMap<u64, Rational>,
}

impl BasicProbabilityAssignment {
    /// Validates and collects the masses. Repeated sets are summed and zero
    /// masses dropped.
    pub fn new(universe: &StateUniverse, entries: impl IntoIterator<Item = (StateSet, Rational)>) -> Result<Self> {
        let mut focal: BTreeMap<u64, Rational> = BTreeMap::new();
        for (set, mass) in entries {
            universe.ensure_same(set.universe())?;
            if mass.is_zero() {
                continue;
            }
            if !mass.is_positive() {
                return Err(Error::InvalidBpa(format!("negative mass {mass} on {set}")));
            }
            if set.is_empty() {
                return Err(Error::InvalidBpa(format!("mass {mass} on the empty set")));
            }
            let slot = focal.entry(set.bits()).or_insert_with(Rational::zero);
            *slot = &*slot + &mass;
        }
        Self::from_masks(universe.clone(), focal)
    }

    fn from_masks(universe: StateUniverse, focal: BTreeMap<u64, Rational>) -> Result<Self> {
        let total: Rational = focal.values().sum();
        if total != Rational::one() {
            return Err(Error::InvalidBpa(format!("masses sum to {total}")));
        }
        if let Some(v) = focal.values().find(|v| !v.is_unit() && !v.is_open_unit()) {
            return Err(Error::InvalidBpa(format!("mass {v} outside (0,1]")));
        }
        Ok(BasicProbabilityAssignment { universe, focal })
    }

    /// All mass on the full set: the identity of Dempster's rule.
    pub fn vacuous(universe: &StateUniverse) -> Self {
        let mut focal = BTreeMap::new();
        focal.insert(universe.full_mask(), Rational::one());
        BasicProbabilityAssignment {
            universe: universe.clone(),
            focal,
        }
    }

    pub fn universe(&self) -> &StateUniverse {
        &self.universe
    }

    pub fn mass(&self, set: &StateSet) -> Result<Rational> {
        self.universe.ensure_same(set.universe())?;
        Ok(self.mass_of(set.bits()))
    }

    pub(crate) fn mass_of(&self, bits: u64) -> Rational {
        self.focal.get(&bits).cloned().unwrap_or_else(Rational::zero)
    }

    /// Focal sets and their masses, canonically ordered.
    pub fn focal(&self) -> Vec<(StateSet, Rational)> {
        let mut out: Vec<(StateSet, Rational)> = self
            .focal
            .iter()
            .map(|(&m, v)| (self.universe.from_mask(m), v.clone()))
            .collect();
        out.sort_by_key(|(s, _)| canonical_key(s.bits()));
        out
    }

    pub fn bel(&self, p: &StateSet) -> Result<Rational> {
        self.universe.ensure_same(p.universe())?;
        Ok(self.bel_mask(p.bits()))
    }

    pub(crate) fn bel_mask(&self, p: u64) -> Rational {
        self.focal.iter().filter(|(&a, _)| a & !p == 0).map(|(_, v)| v).sum()
    }
}

/// The simple support function of item `i`: `m(E_i) = p_i`, `m(S) = 1 − p_i`.
pub fn simple_support(frame: &QuantitativeEvidenceFrame, i: usize) -> Result<BasicProbabilityAssignment> {
    let item = frame.items().get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        len: frame.len(),
    })?;
    let u = frame.universe();
    BasicProbabilityAssignment::new(
        u,
        [
            (item.content.clone(), item.certainty.clone()),
            (u.full_set(), Rational::one() - &item.certainty),
        ],
    )
}

/// Dempster's rule of combination.
pub fn drc_combine(
    m1: &BasicProbabilityAssignment,
    m2: &BasicProbabilityAssignment,
) -> Result<BasicProbabilityAssignment> {
    if !m1.universe.same_as(&m2.universe) {
        return Err(Error::UniverseMismatch);
    }
    let mut joint: BTreeMap<u64, Rational> = BTreeMap::new();
    for (a, x) in &m1.focal {
        for (b, y) in &m2.focal {
            let c = a & b;
            if c != 0 {
                let slot = joint.entry(c).or_insert_with(Rational::zero);
                *slot = &*slot + &(x * y);
            }
        }
    }
    let k: Rational = joint.values().sum();
    if k.is_zero() {
        return Err(Error::TotalConflict);
    }
    for v in joint.values_mut() {
        *v = &*v / &k;
    }
    BasicProbabilityAssignment::from_masks(m1.universe.clone(), joint)
}

/// Left fold of Dempster's rule over every item's simple support function.
pub fn combine_all(frame: &QuantitativeEvidenceFrame) -> Result<BasicProbabilityAssignment> {
    (0..frame.len()).try_fold(BasicProbabilityAssignment::vacuous(frame.universe()), |acc, i| {
        drc_combine(&acc, &simple_support(frame, i)?)
    })
}

/// `Bel(P) = Σ_{A ⊆ P} m(A)`.
pub fn bel_from_bpa(m: &BasicProbabilityAssignment, p: &StateSet) -> Result<Rational> {
    m.bel(p)
}

/// Whether some dense open of the evidential topology lies inside `p`.
pub fn tme_believes(frame: &QuantitativeEvidenceFrame, p: &StateSet) -> Result<bool> {
    frame
        .universe()
        .ensure_same(p.universe())
        .map_err(|_| Error::FrameMismatch)?;
    let t = frame.topology();
    let bits = p.bits();
    Ok(t.open_masks()
        .iter()
        .any(|&o| o & !bits == 0 && t.neighborhoods().is_dense(o)))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::evidence::car_frame;
    use crate::fusion::tests::frame_strategy;
    use crate::fusion::{justification_frame, Allocator, JustificationKind, MassAllocation};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn abc() -> StateUniverse {
        StateUniverse::new(["a", "b", "c"]).unwrap()
    }

    fn bpa(u: &StateUniverse, entries: &[(&[&str], Rational)]) -> BasicProbabilityAssignment {
        BasicProbabilityAssignment::new(u, entries.iter().map(|(n, v)| (u.set(*n).unwrap(), v.clone()))).unwrap()
    }

    #[test]
    fn simple_support_functions() {
        let f = car_frame();
        let m1 = simple_support(&f, 0).unwrap();
        let u = f.universe();
        assert_eq!(m1.mass(&u.set(["dp", "dm", "do"]).unwrap()).unwrap(), r(9, 10));
        assert_eq!(m1.mass(&u.full_set()).unwrap(), r(1, 10));
        let m3 = simple_support(&f, 2).unwrap();
        assert_eq!(m3.mass(&u.set(["dp", "sp"]).unwrap()).unwrap(), r(9, 20));
        assert_eq!(m3.mass(&u.full_set()).unwrap(), r(11, 20));
        assert_eq!(
            simple_support(&f, 3).unwrap_err(),
            Error::IndexOutOfRange { index: 3, len: 3 }
        );
    }

    #[test]
    fn bpa_validation() {
        let u = abc();
        let e = |entries: Vec<(StateSet, Rational)>| BasicProbabilityAssignment::new(&u, entries).unwrap_err();
        assert!(matches!(
            e(vec![(u.empty_set(), r(1, 2)), (u.full_set(), r(1, 2))]),
            Error::InvalidBpa(_)
        ));
        assert!(matches!(e(vec![(u.full_set(), r(1, 2))]), Error::InvalidBpa(_)));
        assert!(matches!(
            e(vec![(u.set(["a"]).unwrap(), r(3, 2)), (u.full_set(), r(-1, 2))]),
            Error::InvalidBpa(_)
        ));
        let merged = bpa(
            &u,
            &[
                (&["a"], r(1, 4)),
                (&["a"], r(1, 4)),
                (&["b"], r(1, 2)),
                (&["c"], r(0, 1)),
            ],
        );
        assert_eq!(merged.focal().len(), 2);
        assert_eq!(merged.mass(&u.set(["a"]).unwrap()).unwrap(), r(1, 2));
    }

    #[test]
    fn dempster_rule_examples() {
        let u = abc();
        let m1 = bpa(&u, &[(&["a"], r(9, 10)), (&["a", "b", "c"], r(1, 10))]);
        let m2 = bpa(&u, &[(&["b"], r(9, 10)), (&["a", "b", "c"], r(1, 10))]);
        let m = drc_combine(&m1, &m2).unwrap();
        assert_eq!(
            m.focal(),
            vec![
                (u.set(["a"]).unwrap(), r(9, 19)),
                (u.set(["b"]).unwrap(), r(9, 19)),
                (u.full_set(), r(1, 19)),
            ]
        );
        assert_eq!(drc_combine(&m1, &BasicProbabilityAssignment::vacuous(&u)).unwrap(), m1);

        let a = bpa(&u, &[(&["a"], Rational::one())]);
        let b = bpa(&u, &[(&["b"], Rational::one())]);
        assert_eq!(drc_combine(&a, &b).unwrap_err(), Error::TotalConflict);

        let other = BasicProbabilityAssignment::vacuous(&StateUniverse::new(["x"]).unwrap());
        assert_eq!(drc_combine(&a, &other).unwrap_err(), Error::UniverseMismatch);
    }

    #[test]
    fn combined_car_belief() {
        let f = car_frame();
        let m = combine_all(&f).unwrap();
        let u = f.universe();
        assert_eq!(
            bel_from_bpa(&m, &u.set(["dp", "do", "dm"]).unwrap()).unwrap(),
            r(477, 530)
        );
        assert_eq!(bel_from_bpa(&m, &u.full_set()).unwrap(), Rational::one());
        assert_eq!(bel_from_bpa(&m, &u.empty_set()).unwrap(), Rational::zero());
        // K = 1 − δ(E2,E3) − δ(E1,E2,E3) = 530/800.
        assert_eq!(m.mass(&u.full_set()).unwrap(), r(11, 530));
    }

    #[test]
    fn tme_examples() {
        let f = car_frame();
        let u = f.universe();
        assert!(tme_believes(&f, &u.set(["sp", "dp", "do", "dm"]).unwrap()).unwrap());
        assert!(!tme_believes(&f, &u.set(["sp", "dp"]).unwrap()).unwrap());
        assert!(tme_believes(&f, &u.full_set()).unwrap());
        assert!(tme_believes(&f, &u.set(["dp", "dm"]).unwrap()).unwrap());
        assert!(!tme_believes(&f, &u.set(["dp", "do", "sm"]).unwrap()).unwrap());
        assert_eq!(tme_believes(&f, &abc().full_set()).unwrap_err(), Error::FrameMismatch);
    }

    fn bpa_strategy(n: usize) -> impl Strategy<Value = BasicProbabilityAssignment> {
        let full = (1u64 << n) - 1;
        proptest::collection::vec((1..=full, 1i64..=9), 1..=4).prop_map(move |raw| {
            let u = StateUniverse::new((0..n).map(|i| format!("s{i}"))).unwrap();
            let total: i64 = raw.iter().map(|(_, w)| w).sum();
            BasicProbabilityAssignment::new(&u, raw.iter().map(|&(b, w)| (u.from_mask(b), r(w, total)))).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dempster_rule_is_commutative_and_associative(
            a in bpa_strategy(4), b in bpa_strategy(4), c in bpa_strategy(4),
        ) {
            match (drc_combine(&a, &b), drc_combine(&b, &a)) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (x, y) => prop_assert_eq!(x.unwrap_err(), y.unwrap_err()),
            }
            let left = drc_combine(&a, &b).and_then(|ab| drc_combine(&ab, &c));
            let right = drc_combine(&b, &c).and_then(|bc| drc_combine(&a, &bc));
            if let (Ok(l), Ok(r)) = (&left, &right) {
                prop_assert_eq!(l, r);
            } else {
                // Total conflict in a partial product forces it in the whole.
                prop_assert!(left.is_err() && right.is_err());
            }
        }

        #[test]
        fn dst_belief_is_monotone_and_normalized(m in bpa_strategy(4)) {
            let full = m.universe().full_mask();
            prop_assert_eq!(m.bel_mask(full), Rational::one());
            prop_assert_eq!(m.bel_mask(0), Rational::zero());
            for p in 0..=full {
                for q in 0..=full {
                    if p & !q == 0 {
                        prop_assert!(m.bel_mask(p) <= m.bel_mask(q));
                    }
                }
            }
        }

        #[test]
        fn dempster_equals_intersection_under_ds(f in frame_strategy(5, 4)) {
            let m = combine_all(&f).unwrap();
            let j = justification_frame(&f, JustificationKind::DempsterShafer).unwrap();
            let all = MassAllocation::new(&f, &Allocator::Intersection).unwrap().bel_all(&j).unwrap();
            for p in 0..=f.universe().full_mask() {
                prop_assert_eq!(&m.bel_mask(p), &all[p as usize]);
            }
        }

        #[test]
        fn tme_belief_matches_min_dense_under_sd(f in frame_strategy(5, 4)) {
            let j = justification_frame(&f, JustificationKind::StrongDenseness).unwrap();
            let all = MassAllocation::new(&f, &Allocator::MinDense).unwrap().bel_all(&j).unwrap();
            for p in 0..=f.universe().full_mask() {
                let believes = tme_believes(&f, &f.universe().from_mask(p)).unwrap();
                prop_assert_eq!(believes, all[p as usize].is_positive());
            }
        }
    }
}
