//! Geodesic covers: a list of shortest paths such that every vertex lies
//! within distance `rho` of one of them.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_bounded, is_geodesic, Graph, ShortestPathTree, Vertex, Walk, INF};
use crate::oracle::{brute_all_shortest_paths, Budget};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeodesicCover {
    pub rho: u32,
    pub paths: Vec<Walk>,
}

impl GeodesicCover {
    pub fn new(rho: u32, paths: Vec<Walk>) -> Self {
        Self { rho, paths }
    }

    /// Number of geodesics.
    pub fn k(&self) -> usize {
        self.paths.len()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cover serializes")
    }

    /// Checks both cover invariants and turns any violation into an error.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let report = verify_cover(g, self)?;
        match report.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidCover(v.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoverViolation {
    NotGeodesic { path: usize },
    Uncovered { vertex: Vertex, distance: Option<u32> },
}

impl std::fmt::Display for CoverViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NotGeodesic { path } => write!(f, "path {path} is not a geodesic"),
            Self::Uncovered {
                vertex,
                distance: Some(d),
            } => write!(f, "vertex {vertex} is at distance {d} from the cover"),
            Self::Uncovered { vertex, .. } => write!(f, "vertex {vertex} cannot reach the cover"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub ok: bool,
    pub violations: Vec<CoverViolation>,
}

pub fn verify_cover(g: &Graph, c: &GeodesicCover) -> Result<CoverReport> {
    let mut violations = Vec::new();
    for (i, p) in c.paths.iter().enumerate() {
        if !is_geodesic(g, p)? {
            violations.push(CoverViolation::NotGeodesic { path: i });
        }
    }
    let dist = coverage_distances(g, &c.paths);
    for (v, &d) in dist.iter().enumerate() {
        if d == INF || d > c.rho {
            violations.push(CoverViolation::Uncovered {
                vertex: v,
                distance: (d != INF).then_some(d),
            });
        }
    }
    Ok(CoverReport {
        ok: violations.is_empty(),
        violations,
    })
}

fn coverage_distances(g: &Graph, paths: &[Walk]) -> Vec<u32> {
    let sources: Vec<Vertex> = paths.iter().flat_map(|p| p.vertices().iter().copied()).collect();
    bfs_bounded(g, &sources, INF)
}

/// Nearest-geodesic lookup: for every vertex, the closest cover vertex and
/// the geodesic it sits on. Ties go to the lowest geodesic index, then the
/// lowest position along that geodesic.
#[derive(Debug, Clone)]
pub struct NearestCover {
    /// per geodesic, distance of every vertex to it
    dist: Vec<Vec<u32>>,
    /// per geodesic, the lowest position among the nearest vertices on it
    pos: Vec<Vec<usize>>,
    nearest: Vec<(usize, usize)>,
}

impl NearestCover {
    pub fn new(g: &Graph, c: &GeodesicCover) -> Result<Self> {
        if c.paths.is_empty() && g.n() > 0 {
            return Err(Error::InvalidCover("cover has no paths".into()));
        }
        let mut dist = Vec::with_capacity(c.k());
        let mut pos = Vec::with_capacity(c.k());
        for p in &c.paths {
            let (d, l) = labelled_bfs(g, p);
            dist.push(d);
            pos.push(l);
        }
        let mut nearest = Vec::with_capacity(g.n());
        for v in 0..g.n() {
            let j = (0..c.k())
                .min_by_key(|&j| (dist[j][v], j))
                .expect("cover is non-empty");
            if dist[j][v] == INF {
                return Err(Error::InvalidCover(format!(
                    "vertex {v} cannot reach any cover path"
                )));
            }
            nearest.push((j, pos[j][v]));
        }
        Ok(Self { dist, pos, nearest })
    }

    /// Index of the geodesic holding the nearest cover vertex.
    pub fn geodesic(&self, v: Vertex) -> usize {
        self.nearest[v].0
    }

    /// Position of the nearest cover vertex along [`Self::geodesic`].
    pub fn position(&self, v: Vertex) -> usize {
        self.nearest[v].1
    }

    pub fn distance(&self, v: Vertex) -> u32 {
        self.dist[self.geodesic(v)][v]
    }

    /// A shortest walk from `v` to its nearest cover vertex.
    pub fn path_to_cover(&self, g: &Graph, v: Vertex) -> Walk {
        let j = self.geodesic(v);
        let (dist, pos) = (&self.dist[j], &self.pos[j]);
        let target = pos[v];
        let mut vertices = vec![v];
        let mut cur = v;
        while dist[cur] > 0 {
            cur = *g
                .neighbors(cur)
                .iter()
                .find(|&&w| dist[w] + 1 == dist[cur] && pos[w] == target)
                .expect("a predecessor carries the label");
            vertices.push(cur);
        }
        Walk::new(vertices).expect("non-empty")
    }
}

/// BFS from all vertices of `p`, labelling each vertex with the lowest
/// position on `p` among its nearest path vertices.
fn labelled_bfs(g: &Graph, p: &Walk) -> (Vec<u32>, Vec<usize>) {
    let mut dist = vec![INF; g.n()];
    let mut label = vec![usize::MAX; g.n()];
    let mut queue = std::collections::VecDeque::new();
    for (i, &v) in p.vertices().iter().enumerate() {
        if dist[v] == INF {
            dist[v] = 0;
            label[v] = i;
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if dist[w] == INF {
                dist[w] = dist[u] + 1;
                label[w] = label[u];
                queue.push_back(w);
            } else if dist[w] == dist[u] + 1 && label[u] < label[w] {
                label[w] = label[u];
            }
        }
    }
    (dist, label)
}

/// Builds a cover greedily.
///
/// Each round takes the lowest-id vertex farthest from the current coverage,
/// sweeps once to the farthest uncovered vertex from it (the farthest vertex
/// overall when its component has no coverage yet), and from there walks a
/// canonical shortest path to the endpoint that picks up the most uncovered
/// vertices, preferring farther and then lower-id endpoints.
pub fn greedy_cover(g: &Graph, rho: u32) -> GeodesicCover {
    let mut paths: Vec<Walk> = Vec::new();
    loop {
        let dist = coverage_distances(g, &paths);
        let Some(a) = (0..g.n())
            .filter(|&v| dist[v] > rho)
            .max_by(|&x, &y| dist[x].cmp(&dist[y]).then(y.cmp(&x)))
        else {
            break;
        };
        let a = farthest_from(g, a, |x| dist[a] == INF || dist[x] > rho);
        let tree = ShortestPathTree::new(g, a).expect("valid vertex");
        let mut best: Option<((usize, u32), Walk)> = None;
        for b in 0..g.n() {
            let Some(path) = tree.path_to(b) else {
                continue;
            };
            let gain = path.vertices().iter().filter(|&&x| dist[x] > rho).count();
            let score = (gain, tree.dist[b]);
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, path));
            }
        }
        paths.push(best.expect("a reaches itself").1);
    }
    GeodesicCover::new(rho, paths)
}

fn farthest_from(g: &Graph, v: Vertex, eligible: impl Fn(Vertex) -> bool) -> Vertex {
    let d = g.distances_from(v);
    (0..g.n())
        .filter(|&x| d[x] != INF && eligible(x))
        .max_by(|&x, &y| d[x].cmp(&d[y]).then(y.cmp(&x)))
        .expect("v reaches itself")
}

/// Smallest cover with at most `kmax` geodesics, or `None` if there is none.
///
/// Candidates are all shortest paths between all vertex pairs; candidates
/// whose coverage is contained in another's are dropped before a
/// branch-on-lowest-uncovered-vertex search.
pub fn min_cover_exhaustive(
    g: &Graph,
    rho: u32,
    kmax: usize,
    budget: Budget,
) -> Result<Option<GeodesicCover>> {
    if g.n() == 0 {
        return Ok(Some(GeodesicCover::new(rho, Vec::new())));
    }
    let per_pair_cap = budget.max_nodes_expanded;
    let mut candidates: Vec<(FixedBitSet, Walk)> = Vec::new();
    for u in 0..g.n() {
        for v in u..g.n() {
            for p in brute_all_shortest_paths(g, u, v, per_pair_cap)? {
                let d = bfs_bounded(g, p.vertices(), rho);
                let mut bits = FixedBitSet::with_capacity(g.n());
                bits.extend((0..g.n()).filter(|&x| d[x] <= rho));
                candidates.push((bits, p));
                if candidates.len() > budget.max_nodes_expanded {
                    return Err(Error::BudgetExceeded {
                        what: "candidate geodesic",
                        count: candidates.len(),
                        limit: budget.max_nodes_expanded,
                    });
                }
            }
        }
    }
    // keep the first of equal coverages, drop strictly dominated ones
    let mut kept: Vec<(FixedBitSet, Walk)> = Vec::new();
    for (i, (bits, p)) in candidates.iter().enumerate() {
        let dominated = candidates.iter().enumerate().any(|(j, (other, _))| {
            bits.is_subset(other) && (bits != other || j < i)
        });
        if !dominated {
            kept.push((bits.clone(), p.clone()));
        }
    }

    let mut uncovered = FixedBitSet::with_capacity(g.n());
    uncovered.insert_range(..);
    let mut nodes = 0usize;
    for k in 1..=kmax {
        let mut chosen = Vec::new();
        if cover_search(&kept, &uncovered, k, &mut chosen, &mut nodes, budget.max_nodes_expanded)? {
            let paths = chosen.into_iter().map(|i| kept[i].1.clone()).collect();
            return Ok(Some(GeodesicCover::new(rho, paths)));
        }
    }
    Ok(None)
}

fn cover_search(
    cands: &[(FixedBitSet, Walk)],
    uncovered: &FixedBitSet,
    depth: usize,
    chosen: &mut Vec<usize>,
    nodes: &mut usize,
    limit: usize,
) -> Result<bool> {
    *nodes += 1;
    if *nodes > limit {
        return Err(Error::BudgetExceeded {
            what: "cover search node",
            count: *nodes,
            limit,
        });
    }
    let Some(target) = uncovered.minimum() else {
        return Ok(true);
    };
    if depth == 0 {
        return Ok(false);
    }
    for (i, (bits, _)) in cands.iter().enumerate() {
        if !bits.contains(target) {
            continue;
        }
        let mut rest = uncovered.clone();
        rest.difference_with(bits);
        chosen.push(i);
        if cover_search(cands, &rest, depth - 1, chosen, nodes, limit)? {
            return Ok(true);
        }
        chosen.pop();
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::cross;
    use crate::graph::tests::{arb_graph, cycle, grid, path};
    use proptest::prelude::*;

    fn walk(v: &[Vertex]) -> Walk {
        Walk::new(v.to_vec()).unwrap()
    }

    #[test]
    fn verify_examples() {
        let p = path(9);
        let c = GeodesicCover::new(0, vec![walk(&(0..9).collect::<Vec<_>>())]);
        assert!(verify_cover(&p, &c).unwrap().ok);

        let c12 = cycle(12);
        let arc = GeodesicCover::new(0, vec![walk(&[0, 1, 2, 3, 4, 5, 6])]);
        let report = verify_cover(&c12, &arc).unwrap();
        let uncovered: Vec<_> = report
            .violations
            .iter()
            .filter_map(|v| match v {
                CoverViolation::Uncovered { vertex, .. } => Some(*vertex),
                _ => None,
            })
            .collect();
        assert_eq!(uncovered, vec![7, 8, 9, 10, 11]);

        let star = Graph::from_edges(6, (1..6).map(|l| (0, l))).unwrap();
        let c = GeodesicCover::new(1, vec![walk(&[1, 0, 2])]);
        assert!(verify_cover(&star, &c).unwrap().ok);
    }

    #[test]
    fn verify_flags_non_geodesics_and_bad_walks() {
        let c6 = cycle(6);
        let c = GeodesicCover::new(3, vec![walk(&[0, 1, 2, 3, 4])]);
        let r = verify_cover(&c6, &c).unwrap();
        assert_eq!(r.violations, vec![CoverViolation::NotGeodesic { path: 0 }]);
        let bad = GeodesicCover::new(0, vec![walk(&[0, 2])]);
        assert!(verify_cover(&c6, &bad).is_err());
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_cover(&path(9), 0).k(), 1);
        assert_eq!(greedy_cover(&cycle(12), 0).k(), 2);
        let x = cross(2, 3);
        let c = greedy_cover(&x, 0);
        assert_eq!(c.k(), 1);
        let x = cross(4, 3);
        assert_eq!(greedy_cover(&x, 0).k(), 2);
    }

    #[test]
    fn greedy_handles_disconnected_graphs() {
        let g = Graph::from_edges(5, [(0, 1), (3, 4)]).unwrap();
        let c = greedy_cover(&g, 0);
        assert!(verify_cover(&g, &c).unwrap().ok);
        assert_eq!(c.k(), 3);
    }

    #[test]
    fn nearest_cover_tie_breaks() {
        // 4-cycle with cover {0-1} and {3-2}: vertex 2 is on the second path at distance 0
        let c4 = cycle(4);
        let c = GeodesicCover::new(1, vec![walk(&[0, 1]), walk(&[3, 2])]);
        let nc = NearestCover::new(&c4, &c).unwrap();
        assert_eq!((nc.geodesic(2), nc.position(2)), (1, 1));
        // the middle of a 3x3 grid covered by row 0 and row 2: equidistant, lowest index wins
        let g = grid(3, 3);
        let c = GeodesicCover::new(1, vec![walk(&[0, 1, 2]), walk(&[6, 7, 8])]);
        let nc = NearestCover::new(&g, &c).unwrap();
        assert_eq!((nc.geodesic(4), nc.position(4), nc.distance(4)), (0, 1, 1));
        assert_eq!(nc.path_to_cover(&g, 4).vertices(), &[4, 1]);
        // vertex 3 is nearest to positions 0 on both rows
        assert_eq!((nc.geodesic(3), nc.position(3)), (0, 0));
    }

    #[test]
    fn exhaustive_examples() {
        let b = Budget::default();
        assert_eq!(min_cover_exhaustive(&path(6), 0, 1, b).unwrap().unwrap().k(), 1);
        assert!(min_cover_exhaustive(&cycle(12), 0, 1, b).unwrap().is_none());
        assert_eq!(min_cover_exhaustive(&cycle(12), 0, 2, b).unwrap().unwrap().k(), 2);
        // a geodesic on C12 spans 7 vertices; the opposite vertex sits at distance 3
        assert!(min_cover_exhaustive(&cycle(12), 2, 1, b).unwrap().is_none());
        assert_eq!(min_cover_exhaustive(&cycle(12), 3, 1, b).unwrap().unwrap().k(), 1);
        assert_eq!(min_cover_exhaustive(&cross(4, 3), 0, 3, b).unwrap().unwrap().k(), 2);
        let tight = Budget::new(4, 10).unwrap();
        assert!(matches!(
            min_cover_exhaustive(&cycle(12), 0, 2, tight),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn json_format() {
        let c = GeodesicCover::new(1, vec![walk(&[0, 1, 2])]);
        assert_eq!(c.to_json(), r#"{"rho":1,"paths":[[0,1,2]]}"#);
        assert_eq!(GeodesicCover::from_json(&c.to_json()).unwrap(), c);
        assert!(GeodesicCover::from_json(r#"{"rho":1,"paths":[[]]}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn greedy_is_valid_and_not_below_optimum(g in arb_graph(9), rho in 0u32..3) {
            let c = greedy_cover(&g, rho);
            prop_assert!(verify_cover(&g, &c).unwrap().ok);
            if g.is_connected() {
                if let Some(best) = min_cover_exhaustive(&g, rho, 3, Budget::default()).unwrap() {
                    prop_assert!(c.k() >= best.k());
                    prop_assert!(verify_cover(&g, &best).unwrap().ok);
                }
            }
        }
    }
}
