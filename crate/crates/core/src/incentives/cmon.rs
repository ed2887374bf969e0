//! Implementability of consumption rules (cyclic monotonicity) and the
//! transfers that implement them.
//!
//! The IC constraint of type `θ` against `θ'` reads
//! `y(θ) - y(θ') <= v(x(θ), θ) - v(x(θ'), θ)`, a difference constraint on
//! prices. We encode it as an edge `θ' -> θ` with that weight; a consumption
//! rule is implementable iff the graph has no negative cycle, and
//! shortest-path potentials give the implementing prices.

use crate::economy::{ConsumptionRule, Economy, GoodId, TypeId};
use crate::error::{Error, Result};
use crate::incentives::graph::{self, Edge};

/// A cycle of types `θ_0 -> θ_1 -> ... -> θ_0` along which the summed
/// constraint weights are negative.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeCycle {
    pub types: Vec<TypeId>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmonReport {
    pub holds: bool,
    pub witness: Option<NegativeCycle>,
}

pub(crate) fn ic_edges(e: &Economy, assignment: &[(TypeId, Option<GoodId>)]) -> Vec<Edge> {
    let mut edges = Vec::with_capacity(assignment.len() * assignment.len());
    for (to, &(t, x_t)) in assignment.iter().enumerate() {
        for (from, &(_, x_other)) in assignment.iter().enumerate() {
            if from != to {
                edges.push(Edge {
                    from,
                    to,
                    weight: e.value_of(x_t, t) - e.value_of(x_other, t),
                });
            }
        }
    }
    edges
}

/// Cyclic monotonicity among an arbitrary subset of types.
pub(crate) fn cmon_among(e: &Economy, assignment: &[(TypeId, Option<GoodId>)], tol: f64) -> CmonReport {
    let edges = ic_edges(e, assignment);
    match graph::shortest_paths(assignment.len(), &edges, None, tol) {
        Ok(_) => CmonReport {
            holds: true,
            witness: None,
        },
        Err(cycle) => CmonReport {
            holds: false,
            witness: Some(NegativeCycle {
                types: cycle.nodes.iter().map(|&i| assignment[i].0).collect(),
                total: cycle.total,
            }),
        },
    }
}

pub fn check_cmon(e: &Economy, x: &ConsumptionRule, tol: f64) -> CmonReport {
    let assignment: Vec<_> = e.type_ids().map(|t| (t, x.good(t))).collect();
    cmon_among(e, &assignment, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferMode {
    /// Lowest prices consistent with IC once the anchor type's utility is fixed.
    Minimal,
    /// Highest prices consistent with IC and IR at the anchor utility.
    Maximal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferRule {
    pub prices: Vec<f64>,
    pub mode: TransferMode,
    /// The type whose utility equals the anchor.
    pub anchor: TypeId,
}

impl TransferRule {
    pub fn price(&self, t: TypeId) -> f64 {
        self.prices[t.0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransferOutcome {
    Feasible(TransferRule),
    Infeasible(NegativeCycle),
}

impl TransferOutcome {
    pub fn feasible(self) -> Option<TransferRule> {
        match self {
            TransferOutcome::Feasible(r) => Some(r),
            TransferOutcome::Infeasible(_) => None,
        }
    }
}

/// Prices implementing `x`.
///
/// Maximal mode binds participation at `anchor_utility` for the worst-off
/// type and charges every type as much as IC allows. Minimal mode pins the
/// anchor type (default: the type whose participation binds in maximal mode)
/// at `anchor_utility` and lowers everyone else as far as IC allows. Types
/// assigned the null bundle always pay zero.
pub fn construct_transfers(
    e: &Economy,
    x: &ConsumptionRule,
    mode: TransferMode,
    anchor_utility: f64,
    anchor_type: Option<TypeId>,
    tol: f64,
) -> Result<TransferOutcome> {
    let cmon = check_cmon(e, x, tol);
    if let Some(w) = cmon.witness {
        return Ok(TransferOutcome::Infeasible(w));
    }
    let n = e.type_count();
    let assignment: Vec<_> = e.type_ids().map(|t| (t, x.good(t))).collect();
    let ic = ic_edges(e, &assignment);
    let source = n;
    let pin_null = |edges: &mut Vec<Edge>| {
        for t in e.type_ids().filter(|t| x.good(*t).is_none()) {
            edges.push(Edge { from: source, to: t.0, weight: 0.0 });
            edges.push(Edge { from: t.0, to: source, weight: 0.0 });
        }
    };

    let mut edges = ic.clone();
    pin_null(&mut edges);
    for t in e.type_ids().filter(|t| x.good(*t).is_some()) {
        edges.push(Edge {
            from: source,
            to: t.0,
            weight: e.value_of(x.good(t), t) - anchor_utility,
        });
    }
    let maximal = graph::shortest_paths(n + 1, &edges, Some(source), tol)
        .map_err(|_| Error::Precondition("null-bundle types cannot be priced at zero at this anchor".into()))?;
    let maximal: Vec<f64> = maximal[..n].to_vec();
    let utility = |prices: &[f64], t: TypeId| e.value_of(x.good(t), t) - prices[t.0];
    let binding = e
        .type_ids()
        .filter(|t| x.good(*t).is_some())
        .min_by(|a, b| utility(&maximal, *a).total_cmp(&utility(&maximal, *b)))
        .unwrap_or(TypeId(0));

    match mode {
        TransferMode::Maximal => Ok(TransferOutcome::Feasible(TransferRule {
            prices: maximal,
            mode,
            anchor: binding,
        })),
        TransferMode::Minimal => {
            let anchor = anchor_type.unwrap_or(binding);
            if anchor.0 >= n {
                return Err(Error::UnknownType(anchor.0));
            }
            let pinned = e.value_of(x.good(anchor), anchor) - anchor_utility;
            // Negated prices z = -y satisfy the reversed constraints.
            let mut rev: Vec<Edge> = ic
                .iter()
                .map(|ed| Edge { from: ed.to, to: ed.from, weight: ed.weight })
                .collect();
            pin_null(&mut rev);
            rev.push(Edge { from: source, to: anchor.0, weight: -pinned });
            rev.push(Edge { from: anchor.0, to: source, weight: pinned });
            let z = graph::shortest_paths(n + 1, &rev, Some(source), tol).map_err(|_| {
                Error::Precondition(format!(
                    "anchor utility {anchor_utility} for type {} conflicts with zero-priced null bundles",
                    e.type_name(anchor)
                ))
            })?;
            Ok(TransferOutcome::Feasible(TransferRule {
                prices: z[..n].iter().map(|v| -v).collect(),
                mode,
                anchor,
            }))
        }
    }
}
