//! Immutable undirected graphs and the metric primitives everything else is
//! built on: BFS distance fields, balls, spheres, walks and geodesic tests.
//!
//! Vertices are the integers `0..n`. Neighbor lists are kept sorted so that
//! every "pick any" choice downstream can be resolved by lowest id.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// Distance sentinel for unreachable vertices.
pub const INF: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EdgeList", into = "EdgeList")]
pub struct Graph {
    adj: Vec<Vec<Vertex>>,
    m: usize,
}

/// Serialized form of a [`Graph`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeList {
    pub n: usize,
    pub edges: Vec<(Vertex, Vertex)>,
}

impl TryFrom<EdgeList> for Graph {
    type Error = Error;

    fn try_from(e: EdgeList) -> Result<Self> {
        Graph::from_edges(e.n, e.edges)
    }
}

impl From<Graph> for EdgeList {
    fn from(g: Graph) -> Self {
        EdgeList {
            n: g.n(),
            edges: g.edges().collect(),
        }
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range ids.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut adj = vec![Vec::new(); n];
        let mut m = 0;
        for (u, v) in edges {
            check_vertex(n, u)?;
            check_vertex(n, v)?;
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
            m += 1;
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        Ok(Self { adj, m })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    /// Parses the `n m` header followed by `m` lines of `u v`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing `n m` header".into(),
        })?;
        let (n, m) = parse_pair(hline, header)?;

        let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        let mut count = 0;
        for (line, l) in lines {
            let (u, v) = parse_pair(line, l)?;
            count += 1;
            if count > m {
                return Err(Error::Parse {
                    line,
                    message: format!("more than the declared {m} edges"),
                });
            }
            for x in [u, v] {
                if x >= n {
                    return Err(Error::Parse {
                        line,
                        message: format!("vertex {x} out of range for n = {n}"),
                    });
                }
            }
            if u == v {
                return Err(Error::Parse {
                    line,
                    message: format!("self-loop at vertex {u}"),
                });
            }
            if adj[u].contains(&v) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate edge {u}-{v}"),
                });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        if count != m {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                message: format!("expected {m} edges, found {count}"),
            });
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self { adj, m })
    }

    /// Serializes to the text format accepted by [`Graph::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.m());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && v < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        check_vertex(self.n(), v)
    }

    /// Component label per vertex; labels are numbered by lowest member id.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n()];
        let mut next = 0;
        for s in 0..self.n() {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adj[u] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Connected components, each sorted, ordered by lowest member.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let labels = self.component_labels();
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut comps = vec![Vec::new(); count];
        for (v, &l) in labels.iter().enumerate() {
            comps[l].push(v);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().len() == 1
    }

    /// Single-source BFS; panics on an out-of-range source.
    pub fn distances_from(&self, v: Vertex) -> Vec<u32> {
        bfs_bounded(self, &[v], INF)
    }

    pub fn distance(&self, u: Vertex, v: Vertex) -> u32 {
        self.distances_from(u)[v]
    }
}

fn check_vertex(n: usize, v: Vertex) -> Result<()> {
    if v < n {
        Ok(())
    } else {
        Err(Error::VertexOutOfRange { vertex: v, n })
    }
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize)> {
    let mut it = text.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let tok = it.next().ok_or_else(|| Error::Parse {
            line,
            message: format!("missing {what}"),
        })?;
        tok.parse().map_err(|_| Error::Parse {
            line,
            message: format!("`{tok}` is not a non-negative integer"),
        })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if it.next().is_some() {
        return Err(Error::Parse {
            line,
            message: "expected exactly two fields".into(),
        });
    }
    Ok((a, b))
}

/// Hop distances from the nearest of a set of sources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    pub sources: Vec<Vertex>,
    pub dist: Vec<u32>,
}

impl DistanceField {
    pub fn get(&self, v: Vertex) -> Option<u32> {
        match self.dist[v] {
            INF => None,
            d => Some(d),
        }
    }

    pub fn is_reachable(&self, v: Vertex) -> bool {
        self.dist[v] != INF
    }

    /// Largest finite distance.
    pub fn eccentricity(&self) -> u32 {
        self.dist.iter().copied().filter(|&d| d != INF).max().unwrap_or(0)
    }
}

pub fn bfs(g: &Graph, sources: &[Vertex]) -> Result<DistanceField> {
    if sources.is_empty() {
        return Err(Error::EmptySources);
    }
    for &s in sources {
        g.check_vertex(s)?;
    }
    let mut srcs = sources.to_vec();
    srcs.sort_unstable();
    srcs.dedup();
    let dist = bfs_bounded(g, &srcs, INF);
    Ok(DistanceField { sources: srcs, dist })
}

/// Multi-source BFS that stops expanding past `limit`; vertices farther
/// away keep [`INF`]. Sources must be valid ids.
pub fn bfs_bounded(g: &Graph, sources: &[Vertex], limit: u32) -> Vec<u32> {
    let mut dist = vec![INF; g.n()];
    let mut queue = VecDeque::with_capacity(g.n());
    for &s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        if du >= limit {
            continue;
        }
        for &w in g.neighbors(u) {
            if dist[w] == INF {
                dist[w] = du + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// All vertices within distance `r` of `v`, ascending.
pub fn ball(g: &Graph, v: Vertex, r: u32) -> Result<Vec<Vertex>> {
    g.check_vertex(v)?;
    Ok(set_ball(g, &[v], r))
}

/// All vertices within distance `r` of some vertex of `set`, ascending.
pub fn set_ball(g: &Graph, set: &[Vertex], r: u32) -> Vec<Vertex> {
    let dist = bfs_bounded(g, set, r);
    (0..g.n()).filter(|&x| dist[x] <= r).collect()
}

/// Vertices at distance exactly `d` from `u`, ascending.
pub fn sphere(g: &Graph, u: Vertex, d: u32) -> Result<Vec<Vertex>> {
    g.check_vertex(u)?;
    let dist = bfs_bounded(g, &[u], d);
    Ok((0..g.n()).filter(|&x| dist[x] == d).collect())
}

/// A non-empty vertex sequence; consecutive vertices are expected to be adjacent
/// in whichever graph the walk is checked against.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vertex>", into = "Vec<Vertex>")]
pub struct Walk {
    vertices: Vec<Vertex>,
}

#[allow(clippy::len_without_is_empty)]
impl Walk {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyWalk);
        }
        Ok(Self { vertices })
    }

    pub fn single(v: Vertex) -> Self {
        Self { vertices: vec![v] }
    }

    /// Number of edges traversed.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    /// A walk always has a vertex; this is true for single-vertex walks.
    pub fn is_trivial(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn start(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn end(&self) -> Vertex {
        *self.vertices.last().expect("walks are non-empty")
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.vertices
    }

    pub fn is_path(&self) -> bool {
        let mut seen = self.vertices.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    /// Errors unless every consecutive pair is an edge of `g`.
    pub fn check_in(&self, g: &Graph) -> Result<()> {
        for &v in &self.vertices {
            g.check_vertex(v)?;
        }
        match self.vertices.windows(2).position(|w| !g.has_edge(w[0], w[1])) {
            None => Ok(()),
            Some(index) => Err(Error::NotAnEdge {
                index,
                from: self.vertices[index],
                to: self.vertices[index + 1],
            }),
        }
    }

    pub fn concat(&self, other: &Walk) -> Result<Walk> {
        if self.end() != other.start() {
            return Err(Error::EndpointMismatch {
                end: self.end(),
                start: other.start(),
            });
        }
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices[1..]);
        Ok(Walk { vertices })
    }

    /// Subwalk between positions `i` and `j` (inclusive); reversed when `i > j`.
    pub fn slice(&self, i: usize, j: usize) -> Walk {
        let vertices = if i <= j {
            self.vertices[i..=j].to_vec()
        } else {
            self.vertices[j..=i].iter().rev().copied().collect()
        };
        Walk { vertices }
    }

    pub fn reversed(&self) -> Walk {
        Walk {
            vertices: self.vertices.iter().rev().copied().collect(),
        }
    }

    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }
}

impl TryFrom<Vec<Vertex>> for Walk {
    type Error = Error;

    fn try_from(vertices: Vec<Vertex>) -> Result<Self> {
        Walk::new(vertices)
    }
}

impl From<Walk> for Vec<Vertex> {
    fn from(w: Walk) -> Self {
        w.vertices
    }
}

pub fn is_geodesic(g: &Graph, w: &Walk) -> Result<bool> {
    w.check_in(g)?;
    if !w.is_path() {
        return Ok(false);
    }
    Ok(g.distance(w.start(), w.end()) as usize == w.len())
}

pub fn is_almost_shortest(g: &Graph, w: &Walk, gamma: usize) -> Result<bool> {
    w.check_in(g)?;
    let d = g.distance(w.start(), w.end());
    if d == INF {
        return Ok(false);
    }
    Ok(w.len().abs_diff(d as usize) <= gamma)
}

/// BFS tree in which every vertex points to its lowest-id predecessor.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    pub root: Vertex,
    pub dist: Vec<u32>,
    parent: Vec<Vertex>,
}

impl ShortestPathTree {
    pub fn new(g: &Graph, root: Vertex) -> Result<Self> {
        g.check_vertex(root)?;
        let dist = g.distances_from(root);
        let parent = (0..g.n())
            .map(|v| {
                if v == root || dist[v] == INF {
                    v
                } else {
                    *g.neighbors(v)
                        .iter()
                        .find(|&&w| dist[w] + 1 == dist[v])
                        .expect("BFS predecessor exists")
                }
            })
            .collect();
        Ok(Self { root, dist, parent })
    }

    /// Shortest path from the root to `v`, or `None` when unreachable.
    pub fn path_to(&self, v: Vertex) -> Option<Walk> {
        if self.dist[v] == INF {
            return None;
        }
        let mut vertices = vec![v];
        let mut cur = v;
        while cur != self.root {
            cur = self.parent[cur];
            vertices.push(cur);
        }
        vertices.reverse();
        Some(Walk { vertices })
    }
}

/// Canonical shortest `u`-`v` path: walk back from `v` along lowest-id BFS
/// parents of the tree rooted at `u`.
pub fn canonical_shortest_path(g: &Graph, u: Vertex, v: Vertex) -> Result<Option<Walk>> {
    g.check_vertex(v)?;
    Ok(ShortestPathTree::new(g, u)?.path_to(v))
}
