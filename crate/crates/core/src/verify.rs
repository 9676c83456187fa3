//! Executable checks for the axioms and equivalences the pipeline should
//! satisfy, plus a seeded random frame generator.
//!
//! Checks never return errors for failed properties: a failure is a
//! [`CheckOutcome`] carrying a witness that can be replayed through the CLI.

use std::collections::HashMap;
use std::ops::{AddAssign, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::dst::combine_all;
use crate::error::Result;
use crate::evidence::{EvidenceItem, QuantitativeEvidenceFrame};
use crate::fusion::{
    delta_table, justification_frame, validate_allocators, Allocator, JustificationKind, MassAllocation,
    MAX_ENUMERATED_ITEMS,
};
use crate::rational::Rational;
use crate::sets::{members, StateSet, StateUniverse};
use crate::topology::{min_dense_mask, topology_from_masks, Neighborhoods};

/// Largest universe for which checks scan every proposition.
pub const MAX_EXHAUSTIVE_STATES: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub check: String,
    pub passed: bool,
    pub detail: Value,
    /// Frame document the failure was found on, if any.
    pub frame: Option<Value>,
}

impl CheckOutcome {
    fn pass(check: &str, detail: Value) -> Self {
        CheckOutcome {
            check: check.to_string(),
            passed: true,
            detail,
            frame: None,
        }
    }

    fn fail(check: &str, detail: Value) -> Self {
        CheckOutcome {
            check: check.to_string(),
            passed: false,
            detail,
            frame: None,
        }
    }

    fn on(mut self, frame: &QuantitativeEvidenceFrame) -> Self {
        self.frame = Some(frame.to_json_value());
        self
    }

    /// `{"check", "frame", "detail"}`.
    pub fn witness(&self) -> Value {
        json!({
            "check": self.check,
            "frame": self.frame.clone().unwrap_or(Value::Null),
            "detail": self.detail,
        })
    }
}

fn text(r: &Rational) -> String {
    r.to_string()
}

/// Non-negative values summing to exactly one.
pub fn check_mass_axioms(values: &[Rational]) -> CheckOutcome {
    const NAME: &str = "mass-axioms";
    if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| v.is_negative()) {
        return CheckOutcome::fail(NAME, json!({"negative": {"index": k, "value": text(v)}}));
    }
    let total: Rational = values.iter().sum();
    let detail = json!({"count": values.len(), "total": text(&total)});
    if total == Rational::one() {
        CheckOutcome::pass(NAME, detail)
    } else {
        CheckOutcome::fail(NAME, detail)
    }
}

/// Zero on `∅`, non-negative, total exactly one.
pub fn check_bpa_axioms(entries: &[(StateSet, Rational)]) -> CheckOutcome {
    const NAME: &str = "bpa-axioms";
    for (set, v) in entries {
        if set.is_empty() && !v.is_zero() {
            return CheckOutcome::fail(NAME, json!({"empty-set-mass": text(v)}));
        }
        if v.is_negative() {
            return CheckOutcome::fail(NAME, json!({"negative": {"set": set.names(), "value": text(v)}}));
        }
    }
    let total: Rational = entries.iter().map(|(_, v)| v).sum();
    let detail = json!({"focal": entries.len(), "total": text(&total)});
    if total == Rational::one() {
        CheckOutcome::pass(NAME, detail)
    } else {
        CheckOutcome::fail(NAME, detail)
    }
}

/// `Bel(∅) = 0`, `Bel(S) = 1`, monotonicity and superadditivity for every
/// union of at most `n_max` distinct propositions from `pool`.
pub fn check_belief_axioms(
    universe: &StateUniverse,
    bel: impl Fn(u64) -> Rational,
    pool: &[u64],
    n_max: usize,
) -> CheckOutcome {
    const NAME: &str = "belief-axioms";
    let full = universe.full_mask();
    let needed: Vec<u64> = if universe.len() <= MAX_EXHAUSTIVE_STATES {
        (0..=full).collect()
    } else {
        let mut needed: Vec<u64> = vec![0, full];
        needed.extend_from_slice(pool);
        for_each_tuple(pool.len(), n_max.min(3), &mut |idx| {
            let sets: Vec<u64> = idx.iter().map(|&k| pool[k]).collect();
            needed.push(sets.iter().fold(0, |a, &s| a | s));
            for i in 1..1u32 << sets.len() {
                needed.push(members(i as u64).fold(full, |a, k| a & sets[k]));
            }
        });
        needed.sort_unstable();
        needed.dedup();
        needed
    };
    let values: HashMap<u64, Rational> = needed.iter().map(|&p| (p, bel(p))).collect();
    let (scaled, denom) = common_denominator(&values);
    let b = |p: u64| &scaled[&p];
    let names = |p: u64| universe.names_of(p);

    if !b(0).is_zero() || *b(full) != denom {
        return CheckOutcome::fail(
            NAME,
            json!({"kind": "normalization", "empty": text(&values[&0]), "full": text(&values[&full])}),
        );
    }
    for &p in pool {
        for &q in pool {
            if p & !q == 0 && b(p) > b(q) {
                return CheckOutcome::fail(
                    NAME,
                    json!({
                        "kind": "monotonicity",
                        "subset": names(p), "superset": names(q),
                        "subset_belief": text(&values[&p]), "superset_belief": text(&values[&q]),
                    }),
                );
            }
        }
    }
    let small: Option<Vec<(u64, i128)>> = scaled.iter().map(|(&p, v)| Some((p, v.to_i128()?))).collect();
    let (tuples, violation) = match small {
        Some(small) if universe.len() <= MAX_EXHAUSTIVE_STATES => {
            let mut dense = vec![0i128; 1 << universe.len()];
            for (p, v) in small {
                dense[p as usize] = v;
            }
            let (n, v) = superadditivity(pool, n_max, full, |p| dense[p as usize]);
            (n, v.map(|(sets, rhs)| (sets, BigInt::from(rhs))))
        }
        _ => superadditivity(pool, n_max, full, |p| scaled[&p].clone()),
    };
    match violation {
        Some((sets, rhs)) => {
            let union = sets.iter().fold(0, |a, &s| a | s);
            CheckOutcome::fail(
                NAME,
                json!({
                    "kind": "superadditivity",
                    "sets": sets.iter().map(|&s| names(s)).collect::<Vec<_>>(),
                    "union_belief": text(&values[&union]),
                    "bound": text(&Rational::new(rhs, denom.clone())),
                }),
            )
        }
        None => CheckOutcome::pass(NAME, json!({"pool": pool.len(), "tuples": tuples})),
    }
}

/// Scans tuples of 2 to `n_max` propositions for an inclusion-exclusion
/// bound above the belief of their union. Returns the number of tuples
/// scanned and the first violating tuple with its bound.
fn superadditivity<T>(pool: &[u64], n_max: usize, full: u64, b: impl Fn(u64) -> T) -> (usize, Option<(Vec<u64>, T)>)
where
    T: Ord + Zero + AddAssign + SubAssign,
{
    let mut failure = None;
    let mut tuples = 0usize;
    for_each_tuple(pool.len(), n_max.min(3), &mut |idx| {
        if failure.is_some() || idx.len() < 2 {
            return;
        }
        tuples += 1;
        let mut sets = [0u64; 3];
        for (slot, &k) in sets.iter_mut().zip(idx) {
            *slot = pool[k];
        }
        let sets = &sets[..idx.len()];
        let union = sets.iter().fold(0, |a, &s| a | s);
        let mut rhs = T::zero();
        for i in 1..1u64 << sets.len() {
            let mut inter = full;
            let mut rest = i;
            while rest != 0 {
                inter &= sets[rest.trailing_zeros() as usize];
                rest &= rest - 1;
            }
            if i.count_ones() % 2 == 1 {
                rhs += b(inter);
            } else {
                rhs -= b(inter);
            }
        }
        if b(union) < rhs {
            failure = Some((sets.to_vec(), rhs));
        }
    });
    (tuples, failure)
}

/// Calls `visit` with every strictly increasing index tuple of length
/// `1..=n` below `len`.
fn for_each_tuple(len: usize, n: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(start: usize, len: usize, n: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        for k in start..len {
            cur.push(k);
            visit(cur);
            if cur.len() < n {
                go(k + 1, len, n, cur, visit);
            }
            cur.pop();
        }
    }
    go(0, len, n, &mut Vec::with_capacity(n), visit);
}

fn common_denominator(values: &HashMap<u64, Rational>) -> (HashMap<u64, BigInt>, BigInt) {
    let denom = values.values().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let scaled = values
        .iter()
        .map(|(&p, v)| (p, v.numer() * (&denom / v.denom())))
        .collect();
    (scaled, denom)
}

/// The three conditions on a set of evidence allocation functions.
pub fn check_allocation_definition(
    frame: &QuantitativeEvidenceFrame,
    allocators: &[Allocator],
) -> Result<CheckOutcome> {
    const NAME: &str = "allocation-definition";
    let report = validate_allocators(frame, allocators)?;
    let labels: Vec<&str> = allocators.iter().map(Allocator::label).collect();
    Ok(match report.violations.first() {
        None => CheckOutcome::pass(NAME, json!({"allocators": labels})),
        Some(v) => CheckOutcome::fail(
            NAME,
            json!({
                "allocators": labels,
                "violations": report.violations.len(),
                "first": {
                    "condition": v.condition.to_string(),
                    "allocators": v.allocators,
                    "evidence": v.witness.indices().map(|k| frame.items()[k].name.clone()).collect::<Vec<_>>(),
                    "images": v.images.iter().map(StateSet::names).collect::<Vec<_>>(),
                    "message": v.describe(frame),
                },
            }),
        )
        .on(frame),
    })
}

/// `i(𝑬) ⊆ f(𝑬) ⊆ u(𝑬)` for every allocator and evidence subset.
pub fn check_sandwich(frame: &QuantitativeEvidenceFrame, allocators: &[Allocator]) -> Result<CheckOutcome> {
    const NAME: &str = "sandwich";
    crate::fusion::ensure_enumerable(frame)?;
    let contents = frame.content_masks();
    let full = frame.universe().full_mask();
    let mut counterexamples = Vec::new();
    for a in allocators {
        for bits in 0..1u64 << frame.len() {
            let i = Allocator::Intersection.image_mask(&contents, full, bits);
            let u = Allocator::Union.image_mask(&contents, full, bits);
            let f = a.image_mask(&contents, full, bits);
            if i & !f != 0 || f & !u != 0 {
                counterexamples.push(json!({
                    "allocator": a.label(),
                    "evidence": members(bits).map(|k| frame.items()[k].name.clone()).collect::<Vec<_>>(),
                    "intersection": frame.universe().names_of(i),
                    "image": frame.universe().names_of(f),
                    "union": frame.universe().names_of(u),
                }));
                break;
            }
        }
    }
    let labels: Vec<&str> = allocators.iter().map(Allocator::label).collect();
    Ok(if counterexamples.is_empty() {
        CheckOutcome::pass(NAME, json!({"allocators": labels}))
    } else {
        CheckOutcome::fail(NAME, json!({"allocators": labels, "counterexamples": counterexamples})).on(frame)
    })
}

/// `δ` is a mass function whose marginals are the item certainties.
pub fn check_marginals(frame: &QuantitativeEvidenceFrame) -> Result<CheckOutcome> {
    const NAME: &str = "marginals";
    let table = delta_table(frame)?;
    let values: Vec<Rational> = table.iter().map(|(_, v)| v.clone()).collect();
    let mass = check_mass_axioms(&values);
    if !mass.passed {
        return Ok(CheckOutcome::fail(NAME, json!({"mass": mass.detail})).on(frame));
    }
    for (k, item) in frame.items().iter().enumerate() {
        let marginal: Rational = table.iter().filter(|(s, _)| s.contains(k)).map(|(_, v)| v).sum();
        if marginal != item.certainty {
            return Ok(CheckOutcome::fail(
                NAME,
                json!({"item": item.name, "marginal": text(&marginal), "certainty": text(&item.certainty)}),
            )
            .on(frame));
        }
    }
    Ok(CheckOutcome::pass(NAME, json!({"subsets": table.len()})))
}

/// `δ_τ` is a mass function and `δ_J` a bpa, for every allocator under both
/// built-in frames of justification.
pub fn check_allocated_masses(frame: &QuantitativeEvidenceFrame, allocators: &[Allocator]) -> Result<CheckOutcome> {
    const NAME: &str = "allocated-masses";
    for a in allocators {
        let mass = MassAllocation::new(frame, a)?;
        let focal = mass.focal_elements();
        let values: Vec<Rational> = focal.iter().map(|(_, v)| v.clone()).collect();
        // Mass sent to non-open images is dropped, so the total can fall
        // short of one only if an allocator leaves the topology.
        let tau = check_mass_axioms(&values);
        if !tau.passed {
            return Ok(CheckOutcome::fail(NAME, json!({"allocator": a.label(), "delta_tau": tau.detail})).on(frame));
        }
        for kind in [JustificationKind::DempsterShafer, JustificationKind::StrongDenseness] {
            let j = justification_frame(frame, kind)?;
            let outcome = match mass.delta_j_focal(&j) {
                Ok(focal) => check_bpa_axioms(&focal),
                Err(e) => CheckOutcome::fail(NAME, json!({"error": e.to_string()})),
            };
            if !outcome.passed {
                return Ok(CheckOutcome::fail(
                    NAME,
                    json!({"allocator": a.label(), "justification": j.label(), "delta_j": outcome.detail}),
                )
                .on(frame));
            }
        }
    }
    Ok(CheckOutcome::pass(
        NAME,
        json!({"allocators": allocators.iter().map(Allocator::label).collect::<Vec<_>>()}),
    ))
}

/// Belief axioms for every allocator under both built-in frames, over
/// `pool` (every proposition when `None`).
pub fn check_pipeline_beliefs(
    frame: &QuantitativeEvidenceFrame,
    allocators: &[Allocator],
    pool: Option<&[u64]>,
    n_max: usize,
) -> Result<CheckOutcome> {
    const NAME: &str = "belief-axioms";
    let u = frame.universe();
    let all: Vec<u64>;
    let pool = match pool {
        Some(p) => p,
        None => {
            all = (0..=u.full_mask()).collect();
            &all
        }
    };
    let mut tuples = 0u64;
    for a in allocators {
        let mass = MassAllocation::new(frame, a)?;
        for kind in [JustificationKind::DempsterShafer, JustificationKind::StrongDenseness] {
            let j = justification_frame(frame, kind)?;
            let outcome = check_belief_axioms(u, |p| mass.bel(&j, &u.from_mask(p)).unwrap_or_default(), pool, n_max);
            if !outcome.passed {
                let mut detail = outcome.detail;
                detail["allocator"] = json!(a.label());
                detail["justification"] = json!(j.label());
                return Ok(CheckOutcome::fail(NAME, detail).on(frame));
            }
            tuples += outcome.detail["tuples"].as_u64().unwrap_or(0);
        }
    }
    Ok(CheckOutcome::pass(NAME, json!({"pool": pool.len(), "tuples": tuples})))
}

fn compare_drc(frame: &QuantitativeEvidenceFrame, allocator: &Allocator) -> Result<CheckOutcome> {
    const NAME: &str = "drc-equivalence";
    let m = match combine_all(frame) {
        Ok(m) => m,
        Err(e) => return Ok(CheckOutcome::fail(NAME, json!({"error": e.to_string()})).on(frame)),
    };
    let j = justification_frame(frame, JustificationKind::DempsterShafer)?;
    let mass = MassAllocation::new(frame, allocator)?;
    let u = frame.universe();
    if u.len() <= MAX_EXHAUSTIVE_STATES {
        let bel = match mass.bel_all(&j) {
            Ok(b) => b,
            Err(e) => return Ok(CheckOutcome::fail(NAME, json!({"error": e.to_string()})).on(frame)),
        };
        for (p, pipeline) in bel.iter().enumerate() {
            let oracle = m.bel_mask(p as u64);
            if &oracle != pipeline {
                return Ok(CheckOutcome::fail(
                    NAME,
                    json!({"proposition": u.names_of(p as u64), "pipeline": text(pipeline), "dempster": text(&oracle)}),
                )
                .on(frame));
            }
        }
        return Ok(CheckOutcome::pass(NAME, json!({"propositions": bel.len()})));
    }
    // Belief functions agree everywhere exactly when their masses agree.
    let focal = mass.delta_j_focal(&j)?;
    let same = focal.len() == m.focal().len() && focal.iter().all(|(s, v)| &m.mass_of(s.bits()) == v);
    Ok(if same {
        CheckOutcome::pass(NAME, json!({"focal": focal.len()}))
    } else {
        CheckOutcome::fail(
            NAME,
            json!({"focal_pipeline": focal.len(), "focal_dempster": m.focal().len()}),
        )
        .on(frame)
    })
}

/// Intersection allocation under the Dempster-Shafer frame agrees with
/// Dempster's rule over the simple support functions, at every proposition.
pub fn check_drc_equivalence(frame: &QuantitativeEvidenceFrame) -> Result<CheckOutcome> {
    compare_drc(frame, &Allocator::Intersection)
}

fn compare_tme(frame: &QuantitativeEvidenceFrame, allocator: &Allocator) -> Result<CheckOutcome> {
    const NAME: &str = "tme-equivalence";
    let u = frame.universe();
    if u.len() > MAX_EXHAUSTIVE_STATES {
        return Ok(CheckOutcome::pass(
            NAME,
            json!({"skipped": "universe too large to scan"}),
        ));
    }
    let j = justification_frame(frame, JustificationKind::StrongDenseness)?;
    let bel = match MassAllocation::new(frame, allocator)?.bel_all(&j) {
        Ok(b) => b,
        Err(e) => return Ok(CheckOutcome::fail(NAME, json!({"error": e.to_string()})).on(frame)),
    };
    let t = frame.topology();
    let dense: Vec<u64> = t
        .open_masks()
        .iter()
        .copied()
        .filter(|&o| t.neighborhoods().is_dense(o))
        .collect();
    for (p, b) in bel.iter().enumerate() {
        let believes = dense.iter().any(|&d| d & !(p as u64) == 0);
        if believes != b.is_positive() {
            return Ok(CheckOutcome::fail(
                NAME,
                json!({"proposition": u.names_of(p as u64), "qualitative": believes, "belief": text(b)}),
            )
            .on(frame));
        }
    }
    Ok(CheckOutcome::pass(
        NAME,
        json!({"propositions": bel.len(), "dense_opens": dense.len()}),
    ))
}

/// Minimum-dense allocation under the strong-denseness frame gives positive
/// belief exactly where some dense open is contained in the proposition.
pub fn check_tme_equivalence(frame: &QuantitativeEvidenceFrame) -> Result<CheckOutcome> {
    compare_tme(frame, &Allocator::MinDense)
}

fn compare_min_dense(frame: &QuantitativeEvidenceFrame, min_dense: impl Fn(&[u64]) -> u64) -> Result<CheckOutcome> {
    const NAME: &str = "min-dense";
    crate::fusion::ensure_enumerable(frame)?;
    let contents = frame.content_masks();
    let u = frame.universe();
    let mut checked = 0usize;
    for bits in 1..1u64 << frame.len() {
        let chosen: Vec<u64> = members(bits).map(|k| contents[k]).collect();
        let candidate = min_dense(&chosen);
        let t = topology_from_masks(u, &chosen);
        let local: &Neighborhoods = t.neighborhoods();
        let dense: Vec<u64> = t.open_masks().iter().copied().filter(|&o| local.is_dense(o)).collect();
        let ok = local.is_open(candidate) && local.is_dense(candidate) && dense.iter().all(|&d| candidate & !d == 0);
        if !ok {
            return Ok(CheckOutcome::fail(
                NAME,
                json!({
                    "evidence": members(bits).map(|k| frame.items()[k].name.clone()).collect::<Vec<_>>(),
                    "candidate": u.names_of(candidate),
                    "dense_opens": dense.iter().map(|&d| u.names_of(d)).collect::<Vec<_>>(),
                }),
            )
            .on(frame));
        }
        checked += 1;
    }
    Ok(CheckOutcome::pass(NAME, json!({"evidence_subsets": checked})))
}

/// For every non-empty evidence subset, the computed minimum dense open is
/// open, dense and below every dense open of the topology it generates.
pub fn check_min_dense(frame: &QuantitativeEvidenceFrame) -> Result<CheckOutcome> {
    compare_min_dense(frame, min_dense_mask)
}

/// Every check on one frame. Fails only on capacity or frame errors.
pub fn run_all(frame: &QuantitativeEvidenceFrame, allocators: &[Allocator]) -> Result<Vec<CheckOutcome>> {
    crate::fusion::ensure_enumerable(frame)?;
    let pool = proposition_pool(frame.universe(), 0);
    Ok(vec![
        check_marginals(frame)?,
        check_allocation_definition(frame, allocators)?,
        check_sandwich(frame, allocators)?,
        check_allocated_masses(frame, allocators)?,
        check_pipeline_beliefs(frame, allocators, Some(&pool), 3)?,
        check_drc_equivalence(frame)?,
        check_tme_equivalence(frame)?,
        check_min_dense(frame)?,
    ])
}

/// Every proposition for small universes, otherwise `∅`, `S` and a seeded
/// sample of 24 others.
pub fn proposition_pool(universe: &StateUniverse, seed: u64) -> Vec<u64> {
    let full = universe.full_mask();
    if universe.len() <= 5 {
        return (0..=full).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = vec![0, full];
    while pool.len() < 26 {
        let p = rng.gen_range(1..full);
        if !pool.contains(&p) {
            pool.push(p);
        }
    }
    pool
}

/// A deterministic random frame over states `s0, s1, ...` with between 2 and
/// `max_states` states and between 1 and `max_items` items. Certainties have
/// denominators of at most 32.
pub fn random_frame(seed: u64, max_states: usize, max_items: usize) -> QuantitativeEvidenceFrame {
    let max_states = max_states.clamp(2, 64);
    let max_items = max_items.clamp(1, MAX_ENUMERATED_ITEMS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_states);
    let m = rng.gen_range(1..=max_items);
    let universe = StateUniverse::new((0..n).map(|i| format!("s{i}"))).expect("generated labels are valid");
    let full = universe.full_mask();
    let items = (0..m)
        .map(|k| {
            let bits = rng.gen_range(1..full);
            let den = rng.gen_range(2..=32i64);
            let num = rng.gen_range(1..den);
            EvidenceItem {
                name: format!("E{}", k + 1),
                content: universe.from_mask(bits),
                certainty: Rational::new(num, den),
            }
        })
        .collect();
    QuantitativeEvidenceFrame::new(universe, items).expect("generated frames are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::car_frame;
    use crate::fusion::AllocationTable;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    const IUD: [Allocator; 3] = [Allocator::Intersection, Allocator::Union, Allocator::MinDense];

    #[test]
    fn mass_axioms() {
        let f = QuantitativeEvidenceFrame::new(
            StateUniverse::new(["a", "b"]).unwrap(),
            vec![EvidenceItem {
                name: "E".into(),
                content: StateUniverse::new(["a", "b"]).unwrap().set(["a"]).unwrap(),
                certainty: r(1, 2),
            }],
        )
        .unwrap();
        let values: Vec<Rational> = delta_table(&f).unwrap().into_iter().map(|(_, v)| v).collect();
        assert_eq!(values, vec![r(1, 2), r(1, 2)]);
        let outcome = check_mass_axioms(&values);
        assert!(outcome.passed);
        assert_eq!(outcome.detail["total"], "1");
        assert!(!check_mass_axioms(&[r(1, 2), r(1, 3)]).passed);
        assert!(!check_mass_axioms(&[r(3, 2), r(-1, 2)]).passed);
    }

    #[test]
    fn bpa_axioms() {
        let u = StateUniverse::new(["a", "b"]).unwrap();
        assert!(check_bpa_axioms(&[(u.set(["a"]).unwrap(), r(1, 3)), (u.full_set(), r(2, 3))]).passed);
        assert!(!check_bpa_axioms(&[(u.empty_set(), r(1, 3)), (u.full_set(), r(2, 3))]).passed);
        assert!(!check_bpa_axioms(&[(u.full_set(), r(2, 3))]).passed);
    }

    #[test]
    fn car_frame_passes_everything() {
        let f = car_frame();
        for outcome in run_all(&f, &IUD).unwrap() {
            assert!(outcome.passed, "{}", outcome.witness());
        }
        let u = f.universe();
        let mass = MassAllocation::new(&f, &Allocator::Union).unwrap();
        let j = justification_frame(&f, JustificationKind::DempsterShafer).unwrap();
        let all: Vec<u64> = (0..=u.full_mask()).collect();
        let outcome = check_belief_axioms(u, |p| mass.bel(&j, &u.from_mask(p)).unwrap(), &all, 3);
        assert!(outcome.passed);
        assert_eq!(outcome.detail["tuples"], 2016 + 41664);
    }

    #[test]
    fn sandwich_fails_for_yager_when_evidence_leaves_states_uncovered() {
        let f = car_frame();
        let outcome = check_sandwich(&f, &[Allocator::YagerStyle]).unwrap();
        assert!(!outcome.passed);
        let cx = &outcome.detail["counterexamples"][0];
        assert_eq!(cx["evidence"], json!(["E2", "E3"]));
        assert_eq!(cx["image"], json!(["sp", "dp", "do", "so", "dm", "sm"]));
        assert!(
            check_allocation_definition(&f, &[Allocator::YagerStyle])
                .unwrap()
                .passed
        );
    }

    #[test]
    fn random_frames_are_deterministic() {
        assert_eq!(random_frame(42, 5, 4), random_frame(42, 5, 4));
        assert_ne!(random_frame(42, 5, 4), random_frame(43, 5, 4));
        for seed in 0..50 {
            let f = random_frame(seed, 6, 5);
            assert!((2..=6).contains(&f.universe().len()));
            assert!((1..=5).contains(&f.len()));
            assert!(f.items().iter().all(|it| it.certainty.denom() <= &BigInt::from(32)));
        }
    }

    #[test]
    fn random_frames_pass_everything() {
        for seed in 0..25 {
            let f = random_frame(seed, 5, 4);
            for outcome in run_all(&f, &IUD).unwrap() {
                assert!(outcome.passed, "{}", outcome.witness());
            }
        }
    }

    #[test]
    fn witnesses_replay_as_frames() {
        let f = car_frame();
        let outcome = check_sandwich(&f, &[Allocator::YagerStyle]).unwrap();
        let w = outcome.witness();
        assert_eq!(w["check"], "sandwich");
        let replay = crate::evidence::parse_frame(&w["frame"].to_string()).unwrap();
        assert_eq!(replay, f);
    }

    // Mutation meta-tests: corrupting one value must trip the matching check.

    #[test]
    fn corrupted_delta_is_caught() {
        let f = car_frame();
        let mut values: Vec<Rational> = delta_table(&f).unwrap().into_iter().map(|(_, v)| v).collect();
        values[3] = &values[3] + &r(1, 800);
        assert!(!check_mass_axioms(&values).passed);
    }

    #[test]
    fn corrupted_allocator_image_is_caught() {
        let f = car_frame();
        let e2 = f.universe().set(["dm", "sm"]).unwrap();
        let bad = AllocationTable::tabulate(&f, "d*", &Allocator::MinDense)
            .unwrap()
            .with_image(f.subset(["E2", "E3"]).unwrap(), &e2);
        let outcome = check_allocation_definition(&f, &[Allocator::CustomTable(bad.clone())]).unwrap();
        assert!(!outcome.passed);
        assert_eq!(outcome.detail["first"]["condition"], "open-and-dense");
        assert!(check_sandwich(&f, &[Allocator::CustomTable(bad)]).unwrap().passed);
        let outside = AllocationTable::tabulate(&f, "i*", &Allocator::Intersection)
            .unwrap()
            .with_image(f.subset(["E1", "E2"]).unwrap(), &f.universe().set(["so"]).unwrap());
        assert!(!check_sandwich(&f, &[Allocator::CustomTable(outside)]).unwrap().passed);
    }

    #[test]
    fn corrupted_belief_is_caught() {
        let f = car_frame();
        let u = f.universe();
        let mass = MassAllocation::new(&f, &Allocator::Intersection).unwrap();
        let j = justification_frame(&f, JustificationKind::DempsterShafer).unwrap();
        let target = u.set(["dp", "do", "dm"]).unwrap().bits();
        let all: Vec<u64> = (0..=u.full_mask()).collect();
        let bumped = |p: u64| {
            let b = mass.bel(&j, &u.from_mask(p)).unwrap();
            if p == target {
                b - r(1, 1000)
            } else {
                b
            }
        };
        let outcome = check_belief_axioms(u, bumped, &all, 3);
        assert!(!outcome.passed);
        let vacuous = |p: u64| {
            if p == u.full_mask() {
                Rational::one()
            } else {
                Rational::zero()
            }
        };
        assert!(check_belief_axioms(u, vacuous, &all, 3).passed);
        let broken_total = |p: u64| if p == u.full_mask() { r(1, 2) } else { Rational::zero() };
        assert!(!check_belief_axioms(u, broken_total, &all, 3).passed);
        // Monotone but not superadditive: counts states, capped at one.
        let capped = |p: u64| Rational::new(i64::from(p.count_ones().min(1)), 1i64);
        assert!(!check_belief_axioms(u, capped, &all, 2).passed);
    }

    #[test]
    fn corrupted_pipelines_are_caught() {
        let f = car_frame();
        let bad_i = AllocationTable::tabulate(&f, "i*", &Allocator::Intersection)
            .unwrap()
            .with_image(
                f.subset(["E1", "E2"]).unwrap(),
                &f.universe().set(["dp", "dm", "do"]).unwrap(),
            );
        assert!(!compare_drc(&f, &Allocator::CustomTable(bad_i)).unwrap().passed);
        let bad_d = AllocationTable::tabulate(&f, "d*", &Allocator::MinDense)
            .unwrap()
            .with_image(f.subset(["E1", "E2", "E3"]).unwrap(), &f.universe().full_set());
        assert!(!compare_tme(&f, &Allocator::CustomTable(bad_d)).unwrap().passed);
        let outcome = compare_min_dense(&f, |sets| sets.iter().fold(0, |a, &s| a | s)).unwrap();
        assert!(!outcome.passed);
        assert!(outcome.frame.is_some());
    }

    #[test]
    fn corrupted_bpa_is_caught() {
        let f = car_frame();
        let mut bpa: Vec<(StateSet, Rational)> = combine_all(&f).unwrap().focal();
        bpa[0].1 = &bpa[0].1 + &r(1, 7);
        assert!(!check_bpa_axioms(&bpa).passed);
    }

    #[test]
    fn tuple_enumeration_counts() {
        let mut count = [0usize; 4];
        for_each_tuple(6, 3, &mut |t| count[t.len()] += 1);
        assert_eq!(count, [0, 6, 15, 20]);
    }

    #[test]
    fn common_denominators_are_exact() {
        let values: HashMap<u64, Rational> = [(0, r(1, 6)), (1, r(3, 4))].into_iter().collect();
        let (scaled, d) = common_denominator(&values);
        assert_eq!(d, BigInt::from(12));
        assert_eq!(scaled[&0], BigInt::from(2));
        assert_eq!(scaled[&1], BigInt::from(9));
    }
}
