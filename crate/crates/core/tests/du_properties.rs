mod common;

use common::*;
use intermed::incentives::{
    check_cmon, check_du, check_permuted_not_implementable, construct_transfers, DuViolation, TransferMode,
};
use intermed::{ConsumptionRule, Economy, TypeId, DEFAULT_TOL};
use rand::Rng;

#[test]
fn single_crossing_rules_have_distinct_utility() {
    let mut rng = rng(71);
    for case in 0..100 {
        let (e, x) = single_crossing(&mut rng);
        let du = check_du(&e, &x, DEFAULT_TOL, false).unwrap();
        assert!(du.holds, "case {case}: {:?}", du.violations);
    }
}

#[test]
fn distinct_utility_rules_cannot_be_permuted() {
    let mut rng = rng(72);
    let mut checked = 0;
    for case in 0..400 {
        let e = random_economy(&mut rng, 2, 5, 5);
        let x = random_consumption(&mut rng, &e);
        if !check_cmon(&e, &x, DEFAULT_TOL).holds || !check_du(&e, &x, DEFAULT_TOL, false).unwrap().holds {
            continue;
        }
        assert!(
            check_permuted_not_implementable(&e, &x, DEFAULT_TOL, false).unwrap(),
            "case {case}"
        );
        checked += 1;
    }
    assert!(checked >= 50, "only {checked} qualifying instances");
}

fn assert_forced_indifference(e: &Economy, x: &ConsumptionRule, v: &DuViolation, prices: &[f64], label: &str) {
    for &t in &v.cycle {
        let next = v.successor(t).unwrap();
        let own = e.value_of(x.good(t), t) - prices[t.0];
        let other = e.value_of(x.good(next), t) - prices[next.0];
        assert!((own - other).abs() <= 1e-7, "{label}: {t:?} gains {} from {next:?}'s bundle", other - own);
    }
}

#[test]
fn violations_force_indifference_under_every_transfer_rule() {
    let mut rng = rng(73);
    let mut violations_seen = 0;
    for case in 0..300 {
        let Some((e, x)) = du_violating(&mut rng) else { continue };
        let du = check_du(&e, &x, DEFAULT_TOL, false).unwrap();
        if du.holds {
            continue;
        }
        let anchor = TypeId(rng.gen_range(0..e.type_count()));
        let rule = |mode| {
            construct_transfers(&e, &x, mode, 0.0, Some(anchor), DEFAULT_TOL)
                .unwrap()
                .feasible()
                .expect("implementable")
                .prices
        };
        let max = rule(TransferMode::Maximal);
        let min = rule(TransferMode::Minimal);
        for v in &du.violations {
            violations_seen += 1;
            assert_forced_indifference(&e, &x, v, &max, &format!("case {case} maximal"));
            assert_forced_indifference(&e, &x, v, &min, &format!("case {case} minimal"));
            // Mixtures and shifts of IC prices are IC prices too.
            for _ in 0..5 {
                let w = rng.gen::<f64>();
                let d = rng.gen_range(-3.0..3.0);
                let mix: Vec<f64> = max.iter().zip(&min).map(|(a, b)| w * a + (1.0 - w) * b + d).collect();
                assert_forced_indifference(&e, &x, v, &mix, &format!("case {case} mixture"));
            }
        }
    }
    assert!(violations_seen >= 100, "only {violations_seen} violations exercised");
}
