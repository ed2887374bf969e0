//! Canonical two-type, two-good instances.
//!
//! All three share goods `L` and `H`. In each, the target prices come from
//! binding the low type's participation constraint and the high type's
//! incentive constraint.
//!
//! * `e1`: private values (costs do not depend on the type), masses 0.8/0.2.
//! * `e2`: same tastes and target as `e1`, but serving the high type is
//!   cheaper, so intermediaries have interdependent values.
//! * `e3`: equal masses and tastes with `v(L,θ1) + v(H,θ2) = v(H,θ1) + v(L,θ2)`,
//!   so swapping goods leaves total consumption utility unchanged.

use crate::economy::{AgentType, Bundle, Economy, Good, GoodId, SocialChoiceRule};

fn two_by_two(
    masses: [f64; 2],
    utility: [[f64; 2]; 2],
    cost: [[f64; 2]; 2],
    prices: [f64; 2],
) -> (Economy, SocialChoiceRule) {
    let types = vec![
        AgentType { name: "theta1".into(), mass: masses[0] },
        AgentType { name: "theta2".into(), mass: masses[1] },
    ];
    let goods = vec![
        Good { name: "L".into(), vector: vec![1.0] },
        Good { name: "H".into(), vector: vec![2.0] },
    ];
    let e = Economy::new(
        types,
        goods,
        utility.iter().map(|r| r.to_vec()).collect(),
        cost.iter().map(|r| r.to_vec()).collect(),
    )
    .expect("fixture is valid");
    let scr = SocialChoiceRule::new(
        &e,
        vec![Bundle::offer(GoodId(0), prices[0]), Bundle::offer(GoodId(1), prices[1])],
    )
    .expect("fixture is valid");
    (e, scr)
}

pub fn e1() -> (Economy, SocialChoiceRule) {
    two_by_two(
        [0.8, 0.2],
        [[10.0, 14.0], [12.0, 20.0]],
        [[5.0, 9.0], [5.0, 9.0]],
        [10.0, 18.0],
    )
}

pub fn e2() -> (Economy, SocialChoiceRule) {
    two_by_two(
        [0.8, 0.2],
        [[10.0, 14.0], [12.0, 20.0]],
        [[5.0, 9.0], [3.0, 7.0]],
        [10.0, 18.0],
    )
}

pub fn e3() -> (Economy, SocialChoiceRule) {
    two_by_two(
        [0.5, 0.5],
        [[10.0, 14.0], [12.0, 16.0]],
        [[6.0, 9.0], [3.0, 8.0]],
        [10.0, 14.0],
    )
}
