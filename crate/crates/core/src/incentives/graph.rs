//! Difference-constraint graphs and label-correcting shortest paths.
//!
//! An edge `a -> b` of weight `w` encodes `y[b] <= y[a] + w`. The system is
//! feasible iff the graph has no negative cycle; shortest-path distances are
//! then the greatest solution below the source.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// A negative cycle in node order: `nodes[i] -> nodes[i + 1]`, closing back
/// to `nodes[0]`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Cycle {
    pub nodes: Vec<usize>,
    pub total: f64,
}

/// Bellman-Ford with `tol` slack on every relaxation.
///
/// With `source = None` every node starts at distance zero (a virtual source
/// wired to all nodes), which turns the run into a pure negative-cycle test.
pub(crate) fn shortest_paths(
    nodes: usize,
    edges: &[Edge],
    source: Option<usize>,
    tol: f64,
) -> Result<Vec<f64>, Cycle> {
    let mut dist = match source {
        None => vec![0.0; nodes],
        Some(s) => {
            let mut d = vec![f64::INFINITY; nodes];
            d[s] = 0.0;
            d
        }
    };
    let mut pred: Vec<Option<usize>> = vec![None; nodes];
    let mut last = None;
    for _ in 0..=nodes {
        last = None;
        for e in edges {
            if dist[e.from].is_finite() {
                let cand = dist[e.from] + e.weight;
                if cand < dist[e.to] - tol {
                    dist[e.to] = cand;
                    pred[e.to] = Some(e.from);
                    last = Some(e.to);
                }
            }
        }
        if last.is_none() {
            return Ok(dist);
        }
    }
    let mut v = last.expect("relaxed in the final round");
    for _ in 0..nodes {
        v = pred[v].expect("relaxed nodes have predecessors");
    }
    // v now lies on a cycle of the predecessor graph; walk it backwards.
    let mut cycle = vec![v];
    let mut u = pred[v].expect("cycle node has a predecessor");
    while u != v {
        cycle.push(u);
        u = pred[u].expect("cycle node has a predecessor");
    }
    cycle.reverse();
    let total = cycle_weight(edges, &cycle);
    Err(Cycle { nodes: cycle, total })
}

/// Sum of the lightest edge between consecutive nodes around the cycle.
pub(crate) fn cycle_weight(edges: &[Edge], cycle: &[usize]) -> f64 {
    (0..cycle.len())
        .map(|i| {
            let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
            edges
                .iter()
                .filter(|e| e.from == a && e.to == b)
                .map(|e| e.weight)
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(from: usize, to: usize, weight: f64) -> Edge {
        Edge { from, to, weight }
    }

    #[test]
    fn feasible_system_gives_potentials() {
        let edges = [e(0, 1, 3.0), e(1, 2, -1.0), e(0, 2, 5.0), e(2, 0, 0.0)];
        let d = shortest_paths(3, &edges, Some(0), 1e-12).unwrap();
        assert_eq!(d, vec![0.0, 3.0, 2.0]);
        for ed in &edges {
            assert!(d[ed.to] <= d[ed.from] + ed.weight);
        }
    }

    #[test]
    fn finds_negative_cycle() {
        let edges = [e(0, 1, 1.0), e(1, 2, -3.0), e(2, 0, 1.0), e(2, 3, 4.0)];
        let c = shortest_paths(4, &edges, None, 1e-12).unwrap_err();
        assert_eq!(c.total, -1.0);
        let mut sorted = c.nodes.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    #[test]
    fn zero_cycle_within_tolerance_is_feasible() {
        let edges = [e(0, 1, 1.0), e(1, 0, -1.0 - 1e-12)];
        assert!(shortest_paths(2, &edges, None, 1e-9).is_ok());
    }
}
