//! Brute-force reference solvers. These share nothing with the decomposition
//! pipeline beyond the graph primitives, so they can serve as ground truth.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_bounded, set_ball, Graph, Vertex, Walk, INF};

/// Limits for exhaustive searches. Exceeding either is an error, never a
/// silently truncated answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_subset_size: usize,
    pub max_nodes_expanded: usize,
}

impl Budget {
    pub fn new(max_subset_size: usize, max_nodes_expanded: usize) -> Result<Self> {
        if max_subset_size == 0 || max_nodes_expanded == 0 {
            return Err(Error::Precondition("budget limits must be positive".into()));
        }
        Ok(Self {
            max_subset_size,
            max_nodes_expanded,
        })
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_subset_size: 16,
            max_nodes_expanded: 20_000_000,
        }
    }
}

struct Counter {
    nodes: usize,
    limit: usize,
}

impl Counter {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(Error::BudgetExceeded {
                what: "search node",
                count: self.nodes,
                limit: self.limit,
            });
        }
        Ok(())
    }
}

fn sorted_set(g: &Graph, set: &[Vertex]) -> Result<Vec<Vertex>> {
    for &v in set {
        g.check_vertex(v)?;
    }
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    Ok(s)
}

/// Size of a largest subset of `set` whose members are pairwise more than
/// `two_rho` apart.
pub fn brute_dist_is(g: &Graph, set: &[Vertex], two_rho: u32, budget: Budget) -> Result<usize> {
    brute_dist_is_witness(g, set, two_rho, budget).map(|w| w.len())
}

/// Like [`brute_dist_is`] but returns an optimal set.
///
/// Reduces to maximum independent set on the conflict graph over `set`
/// (edges between members at distance at most `two_rho`) and solves that by
/// branch and bound.
pub fn brute_dist_is_witness(
    g: &Graph,
    set: &[Vertex],
    two_rho: u32,
    budget: Budget,
) -> Result<Vec<Vertex>> {
    let set = sorted_set(g, set)?;
    let s = set.len();
    let mut conflict = vec![FixedBitSet::with_capacity(s); s];
    for (i, &v) in set.iter().enumerate() {
        let dist = bfs_bounded(g, &[v], two_rho);
        for (j, &w) in set.iter().enumerate() {
            if i != j && dist[w] <= two_rho {
                conflict[i].insert(j);
            }
        }
    }

    let mut all = FixedBitSet::with_capacity(s);
    all.insert_range(..);
    let mut best = Vec::new();
    let mut counter = Counter {
        nodes: 0,
        limit: budget.max_nodes_expanded,
    };
    mis_branch(&conflict, all, &mut Vec::new(), &mut best, &mut counter)?;
    let mut witness: Vec<Vertex> = best.into_iter().map(|i| set[i]).collect();
    witness.sort_unstable();
    Ok(witness)
}

fn mis_branch(
    conflict: &[FixedBitSet],
    cands: FixedBitSet,
    current: &mut Vec<usize>,
    best: &mut Vec<usize>,
    counter: &mut Counter,
) -> Result<()> {
    counter.tick()?;
    let remaining = cands.count_ones(..);
    if current.len() + remaining <= best.len() {
        return Ok(());
    }
    let pick = cands
        .ones()
        .map(|v| (conflict[v].intersection(&cands).count(), v))
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let Some((degree, v)) = pick else {
        *best = current.clone();
        return Ok(());
    };
    if degree == 0 {
        let before = current.len();
        current.extend(cands.ones());
        if current.len() > best.len() {
            *best = current.clone();
        }
        current.truncate(before);
        return Ok(());
    }

    let mut with_v = cands.clone();
    with_v.difference_with(&conflict[v]);
    with_v.remove(v);
    current.push(v);
    mis_branch(conflict, with_v, current, best, counter)?;
    current.pop();

    let mut without_v = cands;
    without_v.remove(v);
    mis_branch(conflict, without_v, current, best, counter)
}

/// Size of a smallest set of vertices (anywhere in `g`) that has every member
/// of `set` within distance `rho`.
pub fn brute_dist_ds(g: &Graph, set: &[Vertex], rho: u32, budget: Budget) -> Result<usize> {
    brute_dist_ds_witness(g, set, rho, budget).map(|w| w.len())
}

/// Like [`brute_dist_ds`] but returns an optimal dominating set.
///
/// Iterative deepening on the solution size; each level branches on the
/// dominators of the lowest undominated target.
pub fn brute_dist_ds_witness(
    g: &Graph,
    set: &[Vertex],
    rho: u32,
    budget: Budget,
) -> Result<Vec<Vertex>> {
    let targets = sorted_set(g, set)?;
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    let t = targets.len();
    let mut index = vec![usize::MAX; g.n()];
    for (i, &v) in targets.iter().enumerate() {
        index[v] = i;
    }
    let candidates = set_ball(g, &targets, rho);
    let reach: Vec<FixedBitSet> = candidates
        .iter()
        .map(|&c| {
            let dist = bfs_bounded(g, &[c], rho);
            let mut bits = FixedBitSet::with_capacity(t);
            for (i, &v) in targets.iter().enumerate() {
                if dist[v] <= rho {
                    bits.insert(i);
                }
            }
            bits
        })
        .collect();
    // dominators of each target, as candidate indices in ascending vertex order
    let mut dominators = vec![Vec::new(); t];
    for (ci, bits) in reach.iter().enumerate() {
        for i in bits.ones() {
            dominators[i].push(ci);
        }
    }

    let mut counter = Counter {
        nodes: 0,
        limit: budget.max_nodes_expanded,
    };
    let mut undominated = FixedBitSet::with_capacity(t);
    undominated.insert_range(..);
    for size in 1..=budget.max_subset_size {
        let mut chosen = Vec::with_capacity(size);
        if ds_search(
            &reach,
            &dominators,
            &undominated,
            size,
            &mut chosen,
            &mut counter,
        )? {
            let mut witness: Vec<Vertex> = chosen.into_iter().map(|c| candidates[c]).collect();
            witness.sort_unstable();
            return Ok(witness);
        }
    }
    Err(Error::BudgetExceeded {
        what: "dominating set size",
        count: budget.max_subset_size + 1,
        limit: budget.max_subset_size,
    })
}

fn ds_search(
    reach: &[FixedBitSet],
    dominators: &[Vec<usize>],
    undominated: &FixedBitSet,
    depth: usize,
    chosen: &mut Vec<usize>,
    counter: &mut Counter,
) -> Result<bool> {
    counter.tick()?;
    let Some(target) = undominated.minimum() else {
        return Ok(true);
    };
    if depth == 0 {
        return Ok(false);
    }
    for &c in &dominators[target] {
        let mut rest = undominated.clone();
        rest.difference_with(&reach[c]);
        chosen.push(c);
        if ds_search(reach, dominators, &rest, depth - 1, chosen, counter)? {
            return Ok(true);
        }
        chosen.pop();
    }
    Ok(false)
}

/// Every shortest `u`-`v` path, in lexicographic order. Errors once more than
/// `cap` paths exist; returns an empty list when `v` is unreachable.
pub fn brute_all_shortest_paths(g: &Graph, u: Vertex, v: Vertex, cap: usize) -> Result<Vec<Walk>> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    let to_v = g.distances_from(v);
    if to_v[u] == INF {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut stack = vec![u];
    extend_paths(g, &to_v, &mut stack, &mut out, cap)?;
    Ok(out)
}

fn extend_paths(
    g: &Graph,
    to_v: &[u32],
    stack: &mut Vec<Vertex>,
    out: &mut Vec<Walk>,
    cap: usize,
) -> Result<()> {
    let cur = *stack.last().expect("non-empty");
    if to_v[cur] == 0 {
        if out.len() == cap {
            return Err(Error::BudgetExceeded {
                what: "shortest path count",
                count: cap + 1,
                limit: cap,
            });
        }
        out.push(Walk::new(stack.clone())?);
        return Ok(());
    }
    for &w in g.neighbors(cur) {
        if to_v[w] + 1 == to_v[cur] {
            stack.push(w);
            extend_paths(g, to_v, stack, out, cap)?;
            stack.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::{arb_graph, cycle, grid, path};
    use proptest::prelude::*;

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
    }

    fn all(g: &Graph) -> Vec<Vertex> {
        (0..g.n()).collect()
    }

    /// Plain subset enumeration, used to cross-check the branch and bound.
    fn enumerate_is(g: &Graph, two_rho: u32) -> usize {
        let n = g.n();
        let d: Vec<Vec<u32>> = (0..n).map(|v| g.distances_from(v)).collect();
        (0u32..1 << n)
            .filter(|mask| {
                (0..n).all(|a| {
                    mask >> a & 1 == 0
                        || (a + 1..n).all(|b| mask >> b & 1 == 0 || d[a][b] > two_rho)
                })
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap()
    }

    fn enumerate_ds(g: &Graph, rho: u32) -> usize {
        let n = g.n();
        let d: Vec<Vec<u32>> = (0..n).map(|v| g.distances_from(v)).collect();
        (0u32..1 << n)
            .filter(|mask| (0..n).all(|v| (0..n).any(|c| mask >> c & 1 == 1 && d[c][v] <= rho)))
            .map(|m| m.count_ones() as usize)
            .min()
            .unwrap()
    }

    #[test]
    fn is_examples() {
        let b = Budget::default();
        assert_eq!(brute_dist_is(&path(5), &all(&path(5)), 2, b).unwrap(), 2);
        assert_eq!(brute_dist_is(&path(5), &[], 2, b).unwrap(), 0);
        assert_eq!(brute_dist_is(&complete(5), &all(&complete(5)), 1, b).unwrap(), 1);
        // C12 at distance 2: every third vertex
        assert_eq!(brute_dist_is(&cycle(12), &all(&cycle(12)), 2, b).unwrap(), 4);
    }

    #[test]
    fn ds_examples() {
        let b = Budget::default();
        assert_eq!(brute_dist_ds(&path(9), &all(&path(9)), 1, b).unwrap(), 3);
        assert_eq!(brute_dist_ds(&path(9), &[], 1, b).unwrap(), 0);
        assert_eq!(brute_dist_ds(&star(5), &all(&star(5)), 1, b).unwrap(), 1);
        assert_eq!(brute_dist_ds(&path(5), &all(&path(5)), 1, b).unwrap(), 2);
        assert_eq!(brute_dist_ds(&cycle(12), &all(&cycle(12)), 1, b).unwrap(), 4);
        // dominators may sit outside the target set
        assert_eq!(brute_dist_ds(&path(3), &[0, 2], 1, b).unwrap(), 1);
    }

    #[test]
    fn budgets_are_enforced() {
        let tiny = Budget::new(1, 1_000).unwrap();
        assert!(matches!(
            brute_dist_ds(&path(9), &all(&path(9)), 1, tiny),
            Err(Error::BudgetExceeded { .. })
        ));
        let tiny = Budget::new(8, 3).unwrap();
        assert!(matches!(
            brute_dist_is(&cycle(12), &all(&cycle(12)), 2, tiny),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(Budget::new(0, 1).is_err());
    }

    #[test]
    fn shortest_path_enumeration() {
        assert_eq!(brute_all_shortest_paths(&path(5), 0, 4, 10).unwrap().len(), 1);
        assert_eq!(brute_all_shortest_paths(&cycle(4), 0, 2, 10).unwrap().len(), 2);
        let g = grid(3, 3);
        let paths = brute_all_shortest_paths(&g, 0, 8, 100).unwrap();
        assert_eq!(paths.len(), 6);
        assert!(paths.windows(2).all(|w| w[0] < w[1]));
        assert!(brute_all_shortest_paths(&g, 0, 8, 5).is_err());
        let disconnected = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert!(brute_all_shortest_paths(&disconnected, 0, 2, 5).unwrap().is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn is_matches_enumeration(g in arb_graph(10), two_rho in 0u32..4) {
            let w = brute_dist_is_witness(&g, &all(&g), two_rho, Budget::default()).unwrap();
            prop_assert_eq!(w.len(), enumerate_is(&g, two_rho));
            for (i, &a) in w.iter().enumerate() {
                let d = g.distances_from(a);
                for &b in &w[i + 1..] {
                    prop_assert!(d[b] > two_rho);
                }
            }
        }

        #[test]
        fn ds_matches_enumeration(g in arb_graph(10), rho in 0u32..3) {
            let w = brute_dist_ds_witness(&g, &all(&g), rho, Budget::default()).unwrap();
            prop_assert_eq!(w.len(), enumerate_ds(&g, rho));
            let dist = bfs_bounded(&g, &w, rho);
            prop_assert!(dist.iter().all(|&d| d <= rho));
        }

        #[test]
        fn is_bounded_by_ds(g in arb_graph(12), mask in any::<u16>(), rho in 1u32..3) {
            let set: Vec<Vertex> = (0..g.n()).filter(|&v| mask >> v & 1 == 1).collect();
            let b = Budget::default();
            prop_assert!(brute_dist_is(&g, &set, 2 * rho, b).unwrap() <= brute_dist_ds(&g, &set, rho, b).unwrap());
        }
    }
}
