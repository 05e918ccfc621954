//! Ball and sphere coverings, and distance partition decompositions built
//! from BFS annuli.
//!
//! A distance-`r` tree-partition-decomposition splits the vertices into bags
//! arranged on a tree so that any two vertices at distance at most `r` sit in
//! the same bag or in bags adjacent in the tree. Each bag carries a
//! certificate: a set of centers whose radius balls cover it.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::GeodesicCover;
use crate::error::{Error, Result};
use crate::graph::{bfs_bounded, set_ball, sphere, Graph, ShortestPathTree, Vertex, INF};
use crate::oracle::{brute_dist_ds, Budget};
use crate::snappath::{proximity_bound, simplify, Level, SnapPath, SnapType, Snapper};

/// Balls of `radius` around `centers`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverCertificate {
    pub centers: Vec<Vertex>,
    pub radius: u32,
}

impl CoverCertificate {
    pub fn new(mut centers: Vec<Vertex>, radius: u32) -> Self {
        centers.sort_unstable();
        centers.dedup();
        Self { centers, radius }
    }

    /// Members of `target` farther than `radius` from every center.
    pub fn uncovered(&self, g: &Graph, target: &[Vertex]) -> Vec<Vertex> {
        if self.centers.is_empty() {
            return target.to_vec();
        }
        let dist = bfs_bounded(g, &self.centers, self.radius);
        target.iter().copied().filter(|&v| dist[v] > self.radius).collect()
    }

    pub fn covers(&self, g: &Graph, target: &[Vertex]) -> bool {
        self.uncovered(g, target).is_empty()
    }

    /// Drops centers, lowest id first, whose targets are all covered by
    /// another remaining center.
    pub fn pruned(&self, g: &Graph, target: &[Vertex]) -> Self {
        let r = self.radius;
        let mut slot = vec![usize::MAX; g.n()];
        for (i, &v) in target.iter().enumerate() {
            slot[v] = i;
        }
        let reach: Vec<Vec<usize>> = self
            .centers
            .par_iter()
            .map(|&c| {
                let dist = bfs_bounded(g, &[c], r);
                (0..g.n())
                    .filter(|&v| dist[v] <= r && slot[v] != usize::MAX)
                    .map(|v| slot[v])
                    .collect()
            })
            .collect();
        let mut count = vec![0usize; target.len()];
        for list in &reach {
            for &t in list {
                count[t] += 1;
            }
        }
        let mut kept = Vec::new();
        for (i, list) in reach.iter().enumerate() {
            if list.iter().all(|&t| count[t] >= 2) {
                for &t in list {
                    count[t] -= 1;
                }
            } else {
                kept.push(self.centers[i]);
            }
        }
        Self::new(kept, r)
    }
}

/// Greedy set cover of `target` by radius balls, drawing centers from the
/// whole graph; ties go to the lowest id.
pub fn greedy_certificate(g: &Graph, target: &[Vertex], radius: u32) -> CoverCertificate {
    if target.is_empty() {
        return CoverCertificate::new(Vec::new(), radius);
    }
    let mut slot = vec![usize::MAX; g.n()];
    for (i, &v) in target.iter().enumerate() {
        slot[v] = i;
    }
    let candidates = set_ball(g, target, radius);
    let reach: Vec<FixedBitSet> = candidates
        .par_iter()
        .map(|&c| {
            let dist = bfs_bounded(g, &[c], radius);
            let mut bits = FixedBitSet::with_capacity(target.len());
            for v in (0..g.n()).filter(|&v| dist[v] <= radius && slot[v] != usize::MAX) {
                bits.insert(slot[v]);
            }
            bits
        })
        .collect();
    let mut uncovered = FixedBitSet::with_capacity(target.len());
    uncovered.insert_range(..);
    let mut centers = Vec::new();
    while !uncovered.is_clear() {
        let (best, _) = reach
            .iter()
            .enumerate()
            .map(|(i, bits)| (i, bits.intersection(&uncovered).count()))
            .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        uncovered.difference_with(&reach[best]);
        centers.push(candidates[best]);
    }
    CoverCertificate::new(centers, radius)
}

/// Covering constructions over a validated geodesic cover.
#[derive(Debug, Clone)]
pub struct Coverer<'a> {
    g: &'a Graph,
    cover: &'a GeodesicCover,
    snapper: Snapper<'a>,
}

impl<'a> Coverer<'a> {
    pub fn new(g: &'a Graph, cover: &'a GeodesicCover) -> Result<Self> {
        let snapper = Snapper::new(g, cover)?;
        Ok(Self { g, cover, snapper })
    }

    /// Covers `ball(v, ell*rho)` by balls of radius `2*rho`: on every cover
    /// path, walk along its vertices inside `ball(v, (ell+1)*rho)` and keep
    /// each one farther than `rho` from the last one kept.
    pub fn ball(&self, v: Vertex, ell: u32) -> Result<CoverCertificate> {
        self.g.check_vertex(v)?;
        let rho = self.cover.rho;
        let reach = ell.saturating_add(1).saturating_mul(rho).min(INF - 1);
        let dist = bfs_bounded(self.g, &[v], reach);
        let mut centers = Vec::new();
        for p in &self.cover.paths {
            let mut last: Option<usize> = None;
            for (i, &x) in p.vertices().iter().enumerate() {
                if dist[x] <= reach && last.is_none_or(|l| i - l > rho as usize) {
                    centers.push(x);
                    last = Some(i);
                }
            }
        }
        Ok(CoverCertificate::new(centers, 2 * rho))
    }

    /// Canonical shortest path from `u` to every vertex of `sphere(u, d)`,
    /// snapped and simplified.
    pub fn sphere_snaps(&self, u: Vertex, d: u32) -> Result<Vec<(Vertex, SnapPath)>> {
        let targets = sphere(self.g, u, d)?;
        let tree = ShortestPathTree::new(self.g, u)?;
        let (k, rho) = (self.cover.k(), self.cover.rho);
        targets
            .par_iter()
            .map(|&v| {
                let p = tree.path_to(v).expect("sphere vertices are reachable");
                let sp = simplify(&self.snapper.snap(&p)?, k, rho)?;
                Ok((v, sp))
            })
            .collect()
    }

    /// Covers `sphere(u, d)` by balls of radius `2*rho`. Sphere vertices are
    /// grouped by the type of their simplified snap-path; all members of a
    /// class end near the class representative, so a ball around each
    /// representative is covered and the results are merged.
    pub fn sphere(&self, u: Vertex, d: u32) -> Result<SphereCovering> {
        let snaps = self.sphere_snaps(u, d)?;
        let (k, rho) = (self.cover.k(), self.cover.rho);
        let mut groups: BTreeMap<SnapType, Vec<Vertex>> = BTreeMap::new();
        for (v, sp) in &snaps {
            groups.entry(sp.type_of()?).or_default().push(*v);
        }
        let target: Vec<Vertex> = snaps.iter().map(|(v, _)| *v).collect();
        let gamma = 4 * k as u64 * u64::from(rho);
        let classes: Vec<SphereClass> = groups
            .into_iter()
            .map(|(ty, members)| {
                let radius = proximity_bound(k, rho, ty.level, gamma);
                SphereClass {
                    representative: members[0],
                    radius,
                    ty,
                    members,
                }
            })
            .collect();
        let mut centers = Vec::new();
        if rho == 0 {
            centers.extend(target.iter().copied());
        } else {
            for class in &classes {
                let ell = class.radius.div_ceil(u64::from(rho)).min(u64::from(u32::MAX)) as u32;
                centers.extend(self.ball(class.representative, ell)?.centers);
            }
        }
        let merged = CoverCertificate::new(centers, 2 * rho);
        let certificate = merged.pruned(self.g, &target);
        Ok(SphereCovering {
            target,
            unpruned_centers: merged.centers.len(),
            classes,
            certificate,
        })
    }
}

/// Sphere vertices whose snap-paths share a type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereClass {
    pub ty: SnapType,
    /// Lowest-id member.
    pub representative: Vertex,
    /// Distance within which every member lies from the representative.
    pub radius: u64,
    pub members: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereCovering {
    pub target: Vec<Vertex>,
    pub classes: Vec<SphereClass>,
    pub unpruned_centers: usize,
    pub certificate: CoverCertificate,
}

pub fn cover_ball(g: &Graph, c: &GeodesicCover, v: Vertex, ell: u32) -> Result<CoverCertificate> {
    Coverer::new(g, c)?.ball(v, ell)
}

pub fn cover_sphere(g: &Graph, c: &GeodesicCover, u: Vertex, d: u32) -> Result<SphereCovering> {
    Coverer::new(g, c)?.sphere(u, d)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: usize,
    pub edges: Vec<[usize; 2]>,
}

impl Tree {
    pub fn path(nodes: usize) -> Self {
        Self {
            nodes,
            edges: (1..nodes).map(|i| [i - 1, i]).collect(),
        }
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &[a, b] in &self.edges {
            if a < self.nodes && b < self.nodes {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Why this is not a tree, if it is not.
    pub fn defect(&self) -> Option<String> {
        if self.nodes == 0 {
            return Some("tree has no nodes".into());
        }
        for &[a, b] in &self.edges {
            if a >= self.nodes || b >= self.nodes {
                return Some(format!("edge {a}-{b} names a missing node"));
            }
            if a == b {
                return Some(format!("self-loop at node {a}"));
            }
        }
        if self.edges.len() != self.nodes - 1 {
            return Some(format!(
                "{} edges on {} nodes",
                self.edges.len(),
                self.nodes
            ));
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !std::mem::replace(&mut seen[y], true) {
                    stack.push(y);
                }
            }
        }
        seen.iter()
            .position(|&s| !s)
            .map(|x| format!("node {x} is not connected to node 0"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionDecomposition {
    /// Vertices this close must share a bag or sit in adjacent bags.
    pub rho: u32,
    pub tree: Tree,
    pub bags: Vec<Vec<Vertex>>,
    pub certificates: Vec<CoverCertificate>,
    /// First bag of each connected component, when built per component.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<usize>,
}

impl PartitionDecomposition {
    /// Largest certificate; an upper bound on the width.
    pub fn width(&self) -> usize {
        self.certificates.iter().map(|c| c.centers.len()).max().unwrap_or(0)
    }

    pub fn degree(&self) -> usize {
        self.tree.max_degree()
    }

    pub fn is_path(&self) -> bool {
        self.tree.edges.iter().all(|&[a, b]| a.abs_diff(b) == 1)
            && self.tree.edges.len() + 1 == self.tree.nodes
    }

    /// Bag index of every vertex; `usize::MAX` where missing.
    pub fn bag_of(&self, n: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; n];
        for (i, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if v < n {
                    owner[v] = i;
                }
            }
        }
        owner
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serializes")
    }
}

/// Per-bag figures recorded while building a path partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BagStats {
    pub bag: usize,
    pub size: usize,
    /// Depth of the sphere whose covering seeded the certificate.
    pub sphere_depth: u32,
    pub sphere_classes: usize,
    pub sphere_centers: usize,
    pub centers: usize,
}

/// Annulus thickness, which is also the adjacency radius of the result.
pub fn layer_thickness(rho: u32) -> u32 {
    (2 * rho).max(1)
}

pub fn build_path_partition(g: &Graph, c: &GeodesicCover) -> Result<PartitionDecomposition> {
    build_path_partition_with_stats(g, c).map(|(pd, _)| pd)
}

/// Cuts every component into BFS annuli of thickness `2*rho` around its
/// lowest-id vertex and chains all annuli into one path. A bag's certificate
/// starts from a covering of its innermost sphere, re-covers a radius-`4*rho`
/// ball around each resulting center, and drops redundant centers.
pub fn build_path_partition_with_stats(
    g: &Graph,
    c: &GeodesicCover,
) -> Result<(PartitionDecomposition, Vec<BagStats>)> {
    if g.n() == 0 {
        return Err(Error::Precondition("graph has no vertices".into()));
    }
    let coverer = Coverer::new(g, c)?;
    let rho = c.rho;
    let t = layer_thickness(rho);
    let mut bags: Vec<Vec<Vertex>> = Vec::new();
    let mut seeds: Vec<(Vertex, u32)> = Vec::new();
    let mut components = Vec::new();
    for comp in g.components() {
        let root = comp[0];
        components.push(bags.len());
        let dist = g.distances_from(root);
        let layers = comp.iter().map(|&v| dist[v]).max().unwrap_or(0) / t + 1;
        let first = bags.len();
        bags.extend((0..layers).map(|_| Vec::new()));
        seeds.extend((0..layers).map(|i| (root, i * t)));
        for &v in &comp {
            bags[first + (dist[v] / t) as usize].push(v);
        }
    }
    let built: Vec<(CoverCertificate, BagStats)> = bags
        .par_iter()
        .zip(&seeds)
        .enumerate()
        .map(|(i, (bag, &(root, depth)))| {
            let sph = coverer.sphere(root, depth)?;
            let certificate = if rho == 0 {
                CoverCertificate::new(bag.clone(), 0)
            } else {
                let mut centers = Vec::new();
                for &z in &sph.certificate.centers {
                    centers.extend(coverer.ball(z, 4)?.centers);
                }
                CoverCertificate::new(centers, 2 * rho).pruned(g, bag)
            };
            let stats = BagStats {
                bag: i,
                size: bag.len(),
                sphere_depth: depth,
                sphere_classes: sph.classes.len(),
                sphere_centers: sph.certificate.centers.len(),
                centers: certificate.centers.len(),
            };
            Ok((certificate, stats))
        })
        .collect::<Result<_>>()?;
    let (certificates, stats) = built.into_iter().unzip();
    let pd = PartitionDecomposition {
        rho: t,
        tree: Tree::path(bags.len()),
        bags,
        certificates,
        components: if components.len() > 1 { components } else { Vec::new() },
    };
    Ok((pd, stats))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecompViolation {
    Tree { reason: String },
    BagCount { bags: usize, nodes: usize, certificates: usize },
    VertexOutOfRange { bag: usize, vertex: Vertex },
    Missing { vertex: Vertex },
    Repeated { vertex: Vertex },
    Adjacency { u: Vertex, v: Vertex, distance: u32, bag_u: usize, bag_v: usize },
    CertificateRadius { bag: usize, radius: u32, rho: u32 },
    Uncovered { bag: usize, vertex: Vertex },
}

impl std::fmt::Display for DecompViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Tree { reason } => write!(f, "tree: {reason}"),
            Self::BagCount { bags, nodes, certificates } => write!(
                f,
                "{bags} bags, {nodes} tree nodes and {certificates} certificates"
            ),
            Self::VertexOutOfRange { bag, vertex } => {
                write!(f, "bag {bag} names missing vertex {vertex}")
            }
            Self::Missing { vertex } => write!(f, "vertex {vertex} is in no bag"),
            Self::Repeated { vertex } => write!(f, "vertex {vertex} is in several bags"),
            Self::Adjacency { u, v, distance, bag_u, bag_v } => write!(
                f,
                "vertices {u} and {v} at distance {distance} sit in non-adjacent bags {bag_u} and {bag_v}"
            ),
            Self::CertificateRadius { bag, radius, rho } => {
                write!(f, "certificate of bag {bag} has radius {radius} > {rho}")
            }
            Self::Uncovered { bag, vertex } => {
                write!(f, "vertex {vertex} of bag {bag} is not covered by its certificate")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompReport {
    pub ok: bool,
    pub violations: Vec<DecompViolation>,
}

/// Checks the partition, the tree, the adjacency condition and every
/// certificate, listing all problems found.
pub fn validate_decomposition(g: &Graph, pd: &PartitionDecomposition) -> DecompReport {
    let mut violations = Vec::new();
    if let Some(reason) = pd.tree.defect() {
        violations.push(DecompViolation::Tree { reason });
    }
    if pd.bags.len() != pd.tree.nodes || pd.certificates.len() != pd.bags.len() {
        violations.push(DecompViolation::BagCount {
            bags: pd.bags.len(),
            nodes: pd.tree.nodes,
            certificates: pd.certificates.len(),
        });
    }
    let mut owner = vec![usize::MAX; g.n()];
    for (i, bag) in pd.bags.iter().enumerate() {
        for &v in bag {
            if v >= g.n() {
                violations.push(DecompViolation::VertexOutOfRange { bag: i, vertex: v });
            } else if owner[v] != usize::MAX {
                violations.push(DecompViolation::Repeated { vertex: v });
            } else {
                owner[v] = i;
            }
        }
    }
    for (v, &o) in owner.iter().enumerate() {
        if o == usize::MAX {
            violations.push(DecompViolation::Missing { vertex: v });
        }
    }
    if !violations.is_empty() {
        return DecompReport { ok: false, violations };
    }

    let adj = pd.tree.adjacency();
    let close = |x: usize, y: usize| x == y || adj[x].binary_search(&y).is_ok();
    let found: Vec<Vec<DecompViolation>> = pd
        .bags
        .par_iter()
        .enumerate()
        .map(|(x, bag)| {
            let mut out = Vec::new();
            if bag.is_empty() {
                return out;
            }
            let dist = bfs_bounded(g, bag, pd.rho);
            for w in 0..g.n() {
                if dist[w] <= pd.rho && !close(x, owner[w]) && x < owner[w] {
                    let back = bfs_bounded(g, &[w], pd.rho);
                    let u = *bag.iter().filter(|&&u| back[u] <= pd.rho).min().expect("w is near bag");
                    out.push(DecompViolation::Adjacency {
                        u,
                        v: w,
                        distance: back[u],
                        bag_u: x,
                        bag_v: owner[w],
                    });
                }
            }
            let cert = &pd.certificates[x];
            if cert.radius > pd.rho {
                out.push(DecompViolation::CertificateRadius {
                    bag: x,
                    radius: cert.radius,
                    rho: pd.rho,
                });
            }
            for vertex in cert.uncovered(g, bag) {
                out.push(DecompViolation::Uncovered { bag: x, vertex });
            }
            out
        })
        .collect();
    violations.extend(found.into_iter().flatten());
    DecompReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// Exact minimum number of radius-`pd.rho` balls covering each bag.
pub fn exact_width(g: &Graph, pd: &PartitionDecomposition, budget: Budget) -> Result<Vec<usize>> {
    pd.bags
        .iter()
        .map(|bag| brute_dist_ds(g, bag, pd.rho, budget))
        .collect()
}

/// Builds a tree-partition-decomposition from a bag list. Bags become
/// adjacent when they hold vertices within `rho` of each other; this
/// quotient must be a forest, whose trees are then chained by extra edges.
/// Certificates come from [`greedy_certificate`].
pub fn partition_from_bags(
    g: &Graph,
    rho: u32,
    bags: Vec<Vec<Vertex>>,
) -> Result<PartitionDecomposition> {
    let mut bags: Vec<Vec<Vertex>> = bags.into_iter().filter(|b| !b.is_empty()).collect();
    for bag in &mut bags {
        bag.sort_unstable();
    }
    let mut owner = vec![usize::MAX; g.n()];
    for (i, bag) in bags.iter().enumerate() {
        for &v in bag {
            g.check_vertex(v)?;
            if std::mem::replace(&mut owner[v], i) != usize::MAX {
                return Err(Error::Validation(format!("vertex {v} is in several bags")));
            }
        }
    }
    if let Some(v) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(Error::Validation(format!("vertex {v} is in no bag")));
    }
    let mut quotient: Vec<[usize; 2]> = bags
        .par_iter()
        .enumerate()
        .flat_map_iter(|(x, bag)| {
            let dist = bfs_bounded(g, bag, rho);
            let mut near: Vec<usize> = (0..g.n())
                .filter(|&w| dist[w] <= rho && owner[w] > x)
                .map(|w| owner[w])
                .collect();
            near.sort_unstable();
            near.dedup();
            near.into_iter().map(move |y| [x, y])
        })
        .collect();
    quotient.sort_unstable();

    // union-find to detect cycles and collect the forest's trees
    let mut parent: Vec<usize> = (0..bags.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &[a, b] in &quotient {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return Err(Error::Validation(format!(
                "bags {a} and {b} close a cycle in the bag adjacency"
            )));
        }
        parent[ra] = rb;
    }
    let mut edges = quotient;
    let mut prev_root: Option<usize> = None;
    for x in 0..bags.len() {
        if find(&mut parent, x) == x {
            if let Some(p) = prev_root {
                edges.push([p, x]);
            }
            prev_root = Some(x);
        }
    }
    let certificates = bags
        .par_iter()
        .map(|bag| greedy_certificate(g, bag, rho))
        .collect();
    Ok(PartitionDecomposition {
        rho,
        tree: Tree {
            nodes: bags.len(),
            edges,
        },
        bags,
        certificates,
        components: Vec::new(),
    })
}

/// Random tree-partition-decomposition for testing. Each attempt picks a
/// random root per component and a random annulus thickness of at least
/// `rho`, splits every annulus into clusters of mutually close vertices,
/// and randomly merges clusters within an annulus; the first attempt whose
/// bag adjacency is a forest wins. After `attempts` failures, plain annuli
/// around the lowest-id vertices are used.
pub fn random_tree_partition<R: Rng>(
    g: &Graph,
    rho: u32,
    attempts: usize,
    rng: &mut R,
) -> Result<PartitionDecomposition> {
    let base = rho.max(1);
    for _ in 0..attempts {
        let thickness = base + rng.gen_range(0..=2);
        let merge_chance: f64 = rng.gen_range(0.0..0.6);
        let mut bags = Vec::new();
        for comp in g.components() {
            let root = *comp.choose(rng).expect("components are non-empty");
            let dist = g.distances_from(root);
            let mut annuli: BTreeMap<u32, Vec<Vertex>> = BTreeMap::new();
            for &v in &comp {
                annuli.entry(dist[v] / thickness).or_default().push(v);
            }
            for annulus in annuli.into_values() {
                let mut clusters = close_clusters(g, &annulus, rho);
                clusters.shuffle(rng);
                let mut merged: Vec<Vec<Vertex>> = Vec::new();
                for cl in clusters {
                    match merged.last_mut() {
                        Some(last) if rng.gen_bool(merge_chance) => last.extend(cl),
                        _ => merged.push(cl),
                    }
                }
                bags.extend(merged);
            }
        }
        if let Ok(pd) = partition_from_bags(g, rho, bags) {
            return Ok(pd);
        }
    }
    let bags = g
        .components()
        .into_iter()
        .flat_map(|comp| {
            let dist = g.distances_from(comp[0]);
            let mut annuli: BTreeMap<u32, Vec<Vertex>> = BTreeMap::new();
            for &v in &comp {
                annuli.entry(dist[v] / base).or_default().push(v);
            }
            annuli.into_values()
        })
        .collect();
    partition_from_bags(g, rho, bags)
}

/// Classes of the transitive closure of "within distance `rho`" on `set`.
fn close_clusters(g: &Graph, set: &[Vertex], rho: u32) -> Vec<Vec<Vertex>> {
    let mut member = vec![false; g.n()];
    for &v in set {
        member[v] = true;
    }
    let mut done = vec![false; g.n()];
    let mut out = Vec::new();
    for &s in set {
        if done[s] {
            continue;
        }
        done[s] = true;
        let mut cluster = vec![s];
        let mut i = 0;
        while i < cluster.len() {
            let dist = bfs_bounded(g, &[cluster[i]], rho);
            for &w in set {
                if !done[w] && dist[w] <= rho {
                    done[w] = true;
                    cluster.push(w);
                }
            }
            i += 1;
        }
        cluster.sort_unstable();
        out.push(cluster);
    }
    out
}

/// Checks the raw and simplified snap-path bounds of every snap in a
/// sphere, returning the first problem.
pub fn check_sphere_snaps(
    g: &Graph,
    c: &GeodesicCover,
    snaps: &[(Vertex, SnapPath)],
) -> std::result::Result<(), String> {
    for (v, sp) in snaps {
        if !matches!(sp.level, Level::Simplified(_)) {
            return Err(format!("snap-path to {v} is not simplified"));
        }
        if let Some(problem) = sp.simplified_violations(g, c).first() {
            return Err(format!("snap-path to {v}: {problem}"));
        }
    }
    Ok(())
}
