//! Distance graphs and quasi-isometry certificates.
//!
//! A maximal set of vertices pairwise farther than `r` apart, joined when
//! within `3r` of each other and with every join subdivided into a path of
//! length `3r`, is a coarse model of the original graph: sending each vertex
//! to a nearest member distorts distances by at most a factor of 3 plus `3r`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::GeodesicCover;
use crate::decomp::{build_path_partition, layer_thickness, validate_decomposition, DecompReport, PartitionDecomposition};
use crate::error::{Error, Result};
use crate::graph::{bfs_bounded, Graph, Vertex, INF};

/// `members` is ascending; vertex `i` of `h` is `members[i]`, and so is
/// vertex `i` of `subdivided`, whose remaining vertices are the interior
/// points of the subdivided edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceGraph {
    pub radius: u32,
    pub members: Vec<Vertex>,
    pub h: Graph,
    pub subdivided: Graph,
    /// Index into `members` of a nearest member of every vertex.
    pub phi: Vec<usize>,
}

impl DistanceGraph {
    /// Drops the edge between members `x` and `y` (given as graph vertices)
    /// and rebuilds the subdivision.
    pub fn remove_h_edge(&mut self, x: Vertex, y: Vertex) -> Result<()> {
        let find = |v: Vertex| {
            self.members
                .binary_search(&v)
                .map_err(|_| Error::Precondition(format!("vertex {v} is not a member")))
        };
        let (a, b) = (find(x)?, find(y)?);
        let edges: Vec<_> = self.h.edges().filter(|&e| e != (a.min(b), a.max(b))).collect();
        self.h = Graph::from_edges(self.members.len(), edges)?;
        self.subdivided = subdivide(&self.h, 3 * self.radius)?;
        Ok(())
    }
}

/// Builds the distance graph on a greedily chosen (ascending id) maximal
/// set of vertices pairwise farther than `radius` apart.
pub fn build_distance_graph(g: &Graph, radius: u32) -> Result<DistanceGraph> {
    if radius == 0 {
        return Err(Error::Precondition("distance graph radius must be positive".into()));
    }
    let mut blocked = vec![false; g.n()];
    let mut members = Vec::new();
    for v in 0..g.n() {
        if blocked[v] {
            continue;
        }
        members.push(v);
        let dist = bfs_bounded(g, &[v], radius);
        for (w, &d) in dist.iter().enumerate() {
            if d <= radius {
                blocked[w] = true;
            }
        }
    }
    let mut slot = vec![usize::MAX; g.n()];
    for (i, &m) in members.iter().enumerate() {
        slot[m] = i;
    }
    let reach = 3 * radius;
    let edges: Vec<(usize, usize)> = members
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &m)| {
            let dist = bfs_bounded(g, &[m], reach);
            let slot = &slot;
            members[i + 1..]
                .iter()
                .filter(move |&&w| dist[w] <= reach)
                .map(move |&w| (i, slot[w]))
                .collect::<Vec<_>>()
        })
        .collect();
    let h = Graph::from_edges(members.len(), edges)?;
    let subdivided = subdivide(&h, reach)?;
    let phi = nearest_member(g, &members);
    Ok(DistanceGraph {
        radius,
        members,
        h,
        subdivided,
        phi,
    })
}

fn subdivide(h: &Graph, length: u32) -> Result<Graph> {
    let mut n = h.n();
    let mut edges = Vec::new();
    for (a, b) in h.edges() {
        let mut prev = a;
        for _ in 1..length {
            edges.push((prev, n));
            prev = n;
            n += 1;
        }
        edges.push((prev, b));
    }
    Graph::from_edges(n, edges)
}

/// For every vertex, the index of its nearest member, lowest id on ties.
fn nearest_member(g: &Graph, members: &[Vertex]) -> Vec<usize> {
    let mut dist = vec![INF; g.n()];
    let mut label = vec![usize::MAX; g.n()];
    let mut queue = std::collections::VecDeque::new();
    for (i, &m) in members.iter().enumerate() {
        dist[m] = 0;
        label[m] = i;
        queue.push_back(m);
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
    label
}

/// A pair whose distances break one of the two inequalities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairViolation {
    pub u: Vertex,
    pub v: Vertex,
    /// `None` for unreachable.
    pub dist_source: Option<u32>,
    pub dist_target: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiIsometryCertificate {
    pub m: u64,
    pub a: u64,
    pub ok: bool,
    /// Largest value of `d_target - (m*d_source + a)` over reachable pairs;
    /// non-positive when the upper inequality holds.
    pub max_upper_violation: i64,
    /// Largest value of `d_source - m*(d_target + a)` over reachable pairs;
    /// non-positive when the lower inequality holds.
    pub max_lower_violation: i64,
    pub density_ok: bool,
    /// Target vertices farther than `a` from the image (first few).
    pub far_from_image: Vec<Vertex>,
    /// Violating pairs (first few).
    pub violations: Vec<PairViolation>,
    pub total_violations: usize,
}

const REPORTED: usize = 16;

/// Checks that `map` is an `(m, a)`-quasi-isometry from `g` to `target`:
/// `d/m - a <= d' <= m*d + a` for all pairs, with matching reachability, and
/// every target vertex within `a` of the image.
pub fn verify_map(g: &Graph, target: &Graph, map: &[Vertex], m: u64, a: u64) -> Result<QuasiIsometryCertificate> {
    if map.len() != g.n() {
        return Err(Error::Precondition(format!(
            "map has {} entries for {} vertices",
            map.len(),
            g.n()
        )));
    }
    for &x in map {
        target.check_vertex(x)?;
    }
    if m == 0 {
        return Err(Error::Precondition("multiplier must be positive".into()));
    }
    let (mi, ai) = (m as i64, a as i64);
    let rows: Vec<(i64, i64, Vec<PairViolation>, usize)> = (0..g.n())
        .into_par_iter()
        .map(|u| {
            let dg = g.distances_from(u);
            let dh = target.distances_from(map[u]);
            let (mut up, mut low) = (i64::MIN, i64::MIN);
            let mut bad = Vec::new();
            let mut count = 0;
            for v in u + 1..g.n() {
                let (x, y) = (dg[v], dh[map[v]]);
                let broken = match (x == INF, y == INF) {
                    (true, true) => false,
                    (false, false) => {
                        let (x, y) = (i64::from(x), i64::from(y));
                        let du = y - (mi * x + ai);
                        let dl = x - mi * (y + ai);
                        up = up.max(du);
                        low = low.max(dl);
                        du > 0 || dl > 0
                    }
                    _ => true,
                };
                if broken {
                    count += 1;
                    if bad.len() < REPORTED {
                        bad.push(PairViolation {
                            u,
                            v,
                            dist_source: (x != INF).then_some(x),
                            dist_target: (y != INF).then_some(y),
                        });
                    }
                }
            }
            (up, low, bad, count)
        })
        .collect();
    let mut cert = QuasiIsometryCertificate {
        m,
        a,
        ok: false,
        max_upper_violation: i64::MIN,
        max_lower_violation: i64::MIN,
        density_ok: false,
        far_from_image: Vec::new(),
        violations: Vec::new(),
        total_violations: 0,
    };
    for (up, low, bad, count) in rows {
        cert.max_upper_violation = cert.max_upper_violation.max(up);
        cert.max_lower_violation = cert.max_lower_violation.max(low);
        cert.total_violations += count;
        for b in bad {
            if cert.violations.len() < REPORTED {
                cert.violations.push(b);
            }
        }
    }
    if cert.max_upper_violation == i64::MIN {
        cert.max_upper_violation = 0;
        cert.max_lower_violation = 0;
    }
    let limit = u32::try_from(a).unwrap_or(INF - 1);
    let mut image = map.to_vec();
    image.sort_unstable();
    image.dedup();
    let near = if image.is_empty() {
        vec![INF; target.n()]
    } else {
        bfs_bounded(target, &image, limit)
    };
    let far: Vec<Vertex> = (0..target.n()).filter(|&w| near[w] > limit).collect();
    cert.density_ok = far.is_empty();
    cert.far_from_image = far.into_iter().take(REPORTED).collect();
    cert.ok = cert.total_violations == 0 && cert.density_ok;
    Ok(cert)
}

/// Checks the distance graph's map against its subdivided graph.
pub fn verify_quasi_isometry(g: &Graph, dg: &DistanceGraph, m: u64, a: u64) -> Result<QuasiIsometryCertificate> {
    verify_map(g, &dg.subdivided, &dg.phi, m, a)
}

/// `200 * 14^k * k^(2k+4)`, saturating.
pub fn sphere_cover_constant(k: usize) -> u128 {
    scaled_constant(200, k)
}

/// `260 * 14^k * k^(2k+4)`, saturating.
pub fn sphere_cover_statement_constant(k: usize) -> u128 {
    scaled_constant(260, k)
}

fn scaled_constant(base: u128, k: usize) -> u128 {
    let k128 = k as u128;
    let mut out = base;
    for _ in 0..k {
        out = out.saturating_mul(14);
    }
    for _ in 0..2 * k + 4 {
        out = out.saturating_mul(k128);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDecompositionCheck {
    pub ok: bool,
    pub width: usize,
    pub problems: Vec<String>,
}

/// Checks that `bags` (over vertices `0..h.n()`) form a path-decomposition
/// of `h`: every vertex and edge lies in a bag and the bags holding any
/// vertex are consecutive.
pub fn check_path_decomposition(h: &Graph, bags: &[Vec<usize>]) -> PathDecompositionCheck {
    let mut problems = Vec::new();
    let mut where_: Vec<Vec<usize>> = vec![Vec::new(); h.n()];
    for (i, bag) in bags.iter().enumerate() {
        for &x in bag {
            if x < h.n() {
                where_[x].push(i);
            } else {
                problems.push(format!("bag {i} names missing vertex {x}"));
            }
        }
    }
    for (x, list) in where_.iter().enumerate() {
        match (list.first(), list.last()) {
            (None, _) | (_, None) => problems.push(format!("vertex {x} is in no bag")),
            (Some(&lo), Some(&hi)) if hi - lo + 1 != list.len() => {
                problems.push(format!("bags holding vertex {x} are not consecutive"))
            }
            _ => {}
        }
    }
    for (x, y) in h.edges() {
        let shared = where_[x].iter().any(|i| where_[y].binary_search(i).is_ok());
        if !shared {
            problems.push(format!("edge {x}-{y} lies in no bag"));
        }
    }
    PathDecompositionCheck {
        ok: problems.is_empty(),
        width: bags.iter().map(Vec::len).max().unwrap_or(0),
        problems,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainCertificates {
    pub k: usize,
    pub rho: u32,
    pub decomposition: PartitionDecomposition,
    pub decomposition_report: DecompReport,
    pub distance_graph: DistanceGraph,
    pub quasi_isometry: QuasiIsometryCertificate,
    /// Bags of the path-decomposition of the distance graph, as graph
    /// vertices.
    pub window_bags: Vec<Vec<Vertex>>,
    pub window_layers: usize,
    pub path_decomposition: PathDecompositionCheck,
    pub h_max_degree: usize,
    pub degree_bound: usize,
    pub max_window_bag: usize,
    pub window_bag_bound: u128,
    pub width: usize,
    pub width_bound: u128,
    pub failures: Vec<String>,
    pub ok: bool,
}

/// Builds the annulus partition, the distance graph at radius `4*rho`, its
/// quasi-isometry certificate, and a path-decomposition of it from windows
/// of consecutive annuli, and checks every bound along the way.
///
/// With `rho = 0` the quasi-isometry side uses radius `4` and the partition
/// uses single spheres.
pub fn main_theorem_certificates(g: &Graph, c: &GeodesicCover) -> Result<MainCertificates> {
    let decomposition = build_path_partition(g, c)?;
    let decomposition_report = validate_decomposition(g, &decomposition);
    let k = c.k();
    let rho_q = c.rho.max(1);
    let radius = 4 * rho_q;
    let distance_graph = build_distance_graph(g, radius)?;
    let quasi_isometry = verify_quasi_isometry(g, &distance_graph, 3, u64::from(12 * rho_q))?;

    // members joined in the distance graph are within 12*rho_q, so their
    // annuli are at most this many apart
    let t = layer_thickness(c.rho);
    let span = (12 * rho_q).div_ceil(t) as usize;
    let window_layers = span + 1;
    let owner = decomposition.bag_of(g.n());
    let ell = decomposition.bags.len();
    let mut window_bags: Vec<Vec<Vertex>> = vec![Vec::new(); ell];
    let mut index_bags: Vec<Vec<usize>> = vec![Vec::new(); ell];
    for (idx, &x) in distance_graph.members.iter().enumerate() {
        let b = owner[x];
        for i in b.saturating_sub(span)..=b {
            window_bags[i].push(x);
            index_bags[i].push(idx);
        }
    }
    // no window may straddle two components
    let starts = if decomposition.components.is_empty() {
        vec![0]
    } else {
        decomposition.components.clone()
    };
    for (ci, &s) in starts.iter().enumerate() {
        let end = starts.get(ci + 1).copied().unwrap_or(ell);
        for i in s..end {
            let keep = |&x: &Vertex| owner[x] < end;
            window_bags[i].retain(keep);
            index_bags[i].retain(|&idx| owner[distance_graph.members[idx]] < end);
        }
    }
    let path_decomposition = check_path_decomposition(&distance_graph.h, &index_bags);
    let h_max_degree = distance_graph.h.max_degree();
    let degree_bound = 26 * k;
    let eta = sphere_cover_constant(k);
    let window_bag_bound = eta.saturating_mul(40 * k as u128);
    let width_bound = eta.saturating_mul(10 * k as u128);
    let max_window_bag = path_decomposition.width;
    let width = decomposition.width();

    let mut failures = Vec::new();
    if !decomposition_report.ok {
        failures.push(format!(
            "decomposition invalid: {}",
            decomposition_report.violations[0]
        ));
    }
    if !quasi_isometry.ok {
        failures.push(format!(
            "(3, {}) quasi-isometry fails: {} violating pairs, density {}",
            12 * rho_q,
            quasi_isometry.total_violations,
            if quasi_isometry.density_ok { "ok" } else { "fails" }
        ));
    }
    if !path_decomposition.ok {
        failures.push(format!(
            "window bags are not a path-decomposition: {}",
            path_decomposition.problems[0]
        ));
    }
    if h_max_degree >= degree_bound {
        failures.push(format!("distance graph degree {h_max_degree} >= {degree_bound}"));
    }
    if max_window_bag as u128 > window_bag_bound {
        failures.push(format!("window bag of size {max_window_bag} > {window_bag_bound}"));
    }
    if width as u128 > width_bound {
        failures.push(format!("certificate of size {width} > {width_bound}"));
    }
    Ok(MainCertificates {
        k,
        rho: c.rho,
        ok: failures.is_empty(),
        decomposition,
        decomposition_report,
        distance_graph,
        quasi_isometry,
        window_bags,
        window_layers,
        path_decomposition,
        h_max_degree,
        degree_bound,
        max_window_bag,
        window_bag_bound,
        width,
        width_bound,
        failures,
    })
}
