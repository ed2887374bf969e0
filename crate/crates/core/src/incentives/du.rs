//! The distinct-utility condition: permuting goods cyclically among types
//! with distinct goods must change their total consumption utility.

use itertools::Itertools;

use crate::economy::{ConsumptionRule, Economy, GoodId, TypeId};
use crate::error::{Error, Result};
use crate::incentives::cmon::{check_cmon, cmon_among};

/// Largest type space enumerated without an explicit override.
pub const DU_TYPE_LIMIT: usize = 10;

/// A cyclic permutation `cycle[i] -> cycle[i + 1]` (wrapping) over types
/// with pairwise-distinct goods, under which type `cycle[i]` consumes the
/// good of its successor.
#[derive(Debug, Clone, PartialEq)]
pub struct DuViolation {
    pub cycle: Vec<TypeId>,
    /// Permuted total minus original total.
    pub gap: f64,
}

impl DuViolation {
    pub fn successor(&self, t: TypeId) -> Option<TypeId> {
        let i = self.cycle.iter().position(|&c| c == t)?;
        Some(self.cycle[(i + 1) % self.cycle.len()])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DuReport {
    pub holds: bool,
    pub violations: Vec<DuViolation>,
}

fn guard(e: &Economy, force: bool) -> Result<()> {
    if e.type_count() > DU_TYPE_LIMIT && !force {
        return Err(Error::EnumerationGuard {
            types: e.type_count(),
            limit: DU_TYPE_LIMIT,
        });
    }
    Ok(())
}

/// Calls `f` with every cycle over a distinct-good subset of active types.
/// Types are visited in name order and each cycle starts at its first type
/// in that order, so the sequence is deterministic.
fn for_each_cycle(e: &Economy, x: &ConsumptionRule, mut f: impl FnMut(&[TypeId]) -> bool) {
    let mut active: Vec<TypeId> = e.type_ids().filter(|t| x.good(*t).is_some()).collect();
    active.sort_by(|a, b| e.type_name(*a).cmp(e.type_name(*b)));
    for k in 2..=active.len() {
        for subset in active.iter().copied().combinations(k) {
            let goods: Vec<GoodId> = subset.iter().filter_map(|t| x.good(*t)).collect();
            if !goods.iter().all_unique() {
                continue;
            }
            for rest in subset[1..].iter().copied().permutations(k - 1) {
                let mut cycle = Vec::with_capacity(k);
                cycle.push(subset[0]);
                cycle.extend(rest);
                if !f(&cycle) {
                    return;
                }
            }
        }
    }
}

fn cycle_gap(e: &Economy, x: &ConsumptionRule, cycle: &[TypeId]) -> f64 {
    (0..cycle.len())
        .map(|i| {
            let t = cycle[i];
            let next = cycle[(i + 1) % cycle.len()];
            e.value_of(x.good(next), t) - e.value_of(x.good(t), t)
        })
        .sum()
}

pub fn check_du(e: &Economy, x: &ConsumptionRule, tol: f64, force: bool) -> Result<DuReport> {
    guard(e, force)?;
    let mut violations = Vec::new();
    for_each_cycle(e, x, |cycle| {
        let gap = cycle_gap(e, x, cycle);
        if gap.abs() <= tol {
            violations.push(DuViolation { cycle: cycle.to_vec(), gap });
        }
        true
    });
    Ok(DuReport {
        holds: violations.is_empty(),
        violations,
    })
}

/// Whether every cyclic permutation of `x` over a distinct-good subset fails
/// to be implementable among that subset.
pub fn check_permuted_not_implementable(e: &Economy, x: &ConsumptionRule, tol: f64, force: bool) -> Result<bool> {
    guard(e, force)?;
    if !check_cmon(e, x, tol).holds {
        return Err(Error::Precondition("consumption rule is not implementable".into()));
    }
    if !check_du(e, x, tol, force)?.holds {
        return Err(Error::Precondition("consumption rule violates the distinct-utility condition".into()));
    }
    let mut all = true;
    for_each_cycle(e, x, |cycle| {
        let permuted: Vec<_> = (0..cycle.len())
            .map(|i| (cycle[i], x.good(cycle[(i + 1) % cycle.len()])))
            .collect();
        all = !cmon_among(e, &permuted, tol).holds;
        all
    });
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{AgentType, Good, DEFAULT_TOL};
    use crate::fixtures;

    #[test]
    fn e1_holds() {
        let (e, scr) = fixtures::e1();
        let r = check_du(&e, &scr.consumption(), DEFAULT_TOL, false).unwrap();
        assert!(r.holds);
        assert!(check_permuted_not_implementable(&e, &scr.consumption(), DEFAULT_TOL, false).unwrap());
    }

    #[test]
    fn e3_swap_violates() {
        let (e, scr) = fixtures::e3();
        let r = check_du(&e, &scr.consumption(), DEFAULT_TOL, false).unwrap();
        assert_eq!(
            r.violations,
            vec![DuViolation { cycle: vec![TypeId(0), TypeId(1)], gap: 0.0 }]
        );
        assert_eq!(r.violations[0].successor(TypeId(1)), Some(TypeId(0)));
        let err = check_permuted_not_implementable(&e, &scr.consumption(), DEFAULT_TOL, false).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    fn flat(n: usize) -> Economy {
        let m = 1.0 / n as f64;
        Economy::new(
            (0..n).map(|i| AgentType { name: format!("t{i}"), mass: m }).collect(),
            (0..n).map(|i| Good { name: format!("g{i}"), vector: vec![] }).collect(),
            (0..n).map(|_| (0..n).map(|j| j as f64).collect()).collect(),
            vec![vec![0.0; n]; n],
        )
        .unwrap()
    }

    #[test]
    fn type_independent_values_violate_every_cycle() {
        let e = flat(3);
        let x = ConsumptionRule::new((0..3).map(|i| Some(GoodId(i))).collect());
        let r = check_du(&e, &x, DEFAULT_TOL, false).unwrap();
        // three 2-cycles plus two 3-cycles
        assert_eq!(r.violations.len(), 5);
    }

    #[test]
    fn shared_goods_and_null_types_are_skipped() {
        let e = flat(3);
        let x = ConsumptionRule::new(vec![Some(GoodId(0)), Some(GoodId(0)), None]);
        assert!(check_du(&e, &x, DEFAULT_TOL, false).unwrap().holds);
    }

    #[test]
    fn guard_refuses_large_type_spaces() {
        let e = flat(11);
        let x = ConsumptionRule::new(vec![Some(GoodId(0)); 11]);
        assert!(matches!(
            check_du(&e, &x, DEFAULT_TOL, false),
            Err(Error::EnumerationGuard { types: 11, limit: 10 })
        ));
        assert!(check_du(&e, &x, DEFAULT_TOL, true).unwrap().holds);
    }
}
