use crate::economy::{Bundle, Economy, SocialChoiceRule, TypeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IcViolation {
    pub agent: TypeId,
    pub mimicked: TypeId,
    /// `u(own) - u(mimicked bundle)`, below `-tol`.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrViolation {
    pub agent: TypeId,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcReport {
    pub holds: bool,
    pub violations: Vec<IcViolation>,
    pub ir_violations: Vec<IrViolation>,
}

impl IcReport {
    pub fn ic_holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn ir_holds(&self) -> bool {
        self.ir_violations.is_empty()
    }
}

/// Exhaustive pairwise IC and IR check.
pub fn check_ic_ir(e: &Economy, scr: &SocialChoiceRule, tol: f64) -> IcReport {
    let mut order: Vec<TypeId> = e.type_ids().collect();
    order.sort_by(|a, b| e.type_name(*a).cmp(e.type_name(*b)));

    let mut violations = Vec::new();
    let mut ir_violations = Vec::new();
    for &t in &order {
        let own = e.utility_unchecked(&scr.bundle(t), t);
        if own < -tol {
            ir_violations.push(IrViolation { agent: t, utility: own });
        }
        for &other in &order {
            if other == t {
                continue;
            }
            let slack = own - e.utility_unchecked(&scr.bundle(other), t);
            if slack < -tol {
                violations.push(IcViolation {
                    agent: t,
                    mimicked: other,
                    slack,
                });
            }
        }
    }
    IcReport {
        holds: violations.is_empty() && ir_violations.is_empty(),
        violations,
        ir_violations,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndifferencePair {
    pub who: TypeId,
    pub own: Bundle,
    pub other: Bundle,
    /// A type whose target bundle is `other`.
    pub other_owner: TypeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndifferenceReport {
    pub pairs: Vec<IndifferencePair>,
    /// Types whose participation constraint binds (indifferent to the null bundle).
    pub ir_binding: Vec<TypeId>,
}

impl IndifferenceReport {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty() && self.ir_binding.is_empty()
    }
}

/// Every type indifferent between its target bundle and a different target
/// bundle, plus the types indifferent to staying out.
pub fn find_indifferent_pairs(e: &Economy, scr: &SocialChoiceRule, tol: f64) -> Result<IndifferenceReport> {
    let report = check_ic_ir(e, scr, tol);
    if !report.holds {
        return Err(Error::Precondition(
            "target rule is not incentive compatible and individually rational".into(),
        ));
    }
    let mut pairs: Vec<IndifferencePair> = Vec::new();
    let mut ir_binding = Vec::new();
    for t in e.type_ids() {
        let own = scr.bundle(t);
        let u_own = e.utility_unchecked(&own, t);
        if !own.is_null() && u_own.abs() <= tol {
            ir_binding.push(t);
        }
        for other_t in e.type_ids() {
            let other = scr.bundle(other_t);
            if other_t == t || other.same_as(&own, tol) {
                continue;
            }
            if pairs.iter().any(|p| p.who == t && p.other.same_as(&other, tol)) {
                continue;
            }
            if (u_own - e.utility_unchecked(&other, t)).abs() <= tol {
                pairs.push(IndifferencePair {
                    who: t,
                    own,
                    other,
                    other_owner: other_t,
                });
            }
        }
    }
    Ok(IndifferenceReport { pairs, ir_binding })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{GoodId, DEFAULT_TOL};
    use crate::fixtures;

    #[test]
    fn e1_target_is_ic_ir() {
        let (e, scr) = fixtures::e1();
        let r = check_ic_ir(&e, &scr, DEFAULT_TOL);
        assert!(r.holds);
    }

    #[test]
    fn raising_high_price_breaks_ic() {
        let (e, scr) = fixtures::e1();
        let scr = scr.with_bundle(TypeId(1), Bundle::offer(GoodId(1), 19.0));
        let r = check_ic_ir(&e, &scr, DEFAULT_TOL);
        assert!(!r.holds);
        assert!(r.ir_holds());
        assert_eq!(
            r.violations,
            vec![IcViolation { agent: TypeId(1), mimicked: TypeId(0), slack: -1.0 }]
        );
    }

    #[test]
    fn constant_rule_is_ic() {
        let (e, _) = fixtures::e2();
        let scr = SocialChoiceRule::new(&e, vec![Bundle::offer(GoodId(0), 9.0); 2]).unwrap();
        assert!(check_ic_ir(&e, &scr, DEFAULT_TOL).holds);
    }

    #[test]
    fn violations_are_ordered_by_type_name() {
        let (e, _) = fixtures::e3();
        // θ2 envies θ1 and is below its outside option.
        let scr = SocialChoiceRule::new(
            &e,
            vec![Bundle::offer(GoodId(1), 14.0), Bundle::offer(GoodId(0), 20.0)],
        )
        .unwrap();
        let r = check_ic_ir(&e, &scr, DEFAULT_TOL);
        let agents: Vec<_> = r.violations.iter().map(|v| v.agent).collect();
        assert_eq!(agents, vec![TypeId(1)]);
        assert_eq!(r.ir_violations.len(), 1);
    }

    #[test]
    fn e1_indifference_structure() {
        let (e, scr) = fixtures::e1();
        let r = find_indifferent_pairs(&e, &scr, DEFAULT_TOL).unwrap();
        assert_eq!(r.pairs.len(), 1);
        let p = &r.pairs[0];
        assert_eq!(p.who, TypeId(1));
        assert_eq!(p.own, Bundle::offer(GoodId(1), 18.0));
        assert_eq!(p.other, Bundle::offer(GoodId(0), 10.0));
        assert_eq!(r.ir_binding, vec![TypeId(0)]);

        let slack = scr.with_bundle(TypeId(1), Bundle::offer(GoodId(1), 17.5));
        let r = find_indifferent_pairs(&e, &slack, DEFAULT_TOL).unwrap();
        assert!(r.pairs.is_empty());
        assert_eq!(r.ir_binding, vec![TypeId(0)]);
    }

    #[test]
    fn single_type_with_slack_has_no_indifference() {
        let e = Economy::new(
            vec![crate::economy::AgentType { name: "a".into(), mass: 1.0 }],
            vec![crate::economy::Good { name: "x".into(), vector: vec![] }],
            vec![vec![5.0]],
            vec![vec![1.0]],
        )
        .unwrap();
        let scr = SocialChoiceRule::new(&e, vec![Bundle::offer(GoodId(0), 4.0)]).unwrap();
        assert!(find_indifferent_pairs(&e, &scr, DEFAULT_TOL).unwrap().is_empty());
    }
}
