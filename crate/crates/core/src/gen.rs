//! Instance families with planted geodesic covers.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cover::GeodesicCover;
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, Walk};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InstanceSpec {
    Path { n: usize },
    Cycle { n: usize },
    /// `rho` is the radius of the planted row cover.
    Grid { w: usize, h: usize, rho: u32 },
    Cross { arms: usize, len: usize },
    /// `k` geodesics of length `len`, glued by level-respecting chords, with
    /// hanging chains of depth at most `rho`. Vertex ids are shuffled.
    RandomCoverUnion { k: usize, len: usize, rho: u32, seed: u64 },
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Path { n } => write!(f, "path {n}"),
            Self::Cycle { n } => write!(f, "cycle {n}"),
            Self::Grid { w, h, rho } => write!(f, "grid {w} {h} {rho}"),
            Self::Cross { arms, len } => write!(f, "cross {arms} {len}"),
            Self::RandomCoverUnion { k, len, rho, seed } => {
                write!(f, "random-cover-union {k} {len} {rho} {seed}")
            }
        }
    }
}

impl FromStr for InstanceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let bad = |msg: &str| Error::Parse {
            line: 1,
            message: format!("instance `{s}`: {msg}"),
        };
        let nums: Vec<u64> = words
            .iter()
            .skip(1)
            .map(|w| w.parse().map_err(|_| bad("parameters must be non-negative integers")))
            .collect::<Result<_>>()?;
        let arg = |i: usize| nums[i] as usize;
        let spec = match (words.first().copied(), nums.len()) {
            (Some("path"), 1) => Self::Path { n: arg(0) },
            (Some("cycle"), 1) => Self::Cycle { n: arg(0) },
            (Some("grid"), 2) => Self::Grid {
                w: arg(0),
                h: arg(1),
                rho: 1,
            },
            (Some("grid"), 3) => Self::Grid {
                w: arg(0),
                h: arg(1),
                rho: nums[2] as u32,
            },
            (Some("cross"), 2) => Self::Cross {
                arms: arg(0),
                len: arg(1),
            },
            (Some("random-cover-union"), 4) => Self::RandomCoverUnion {
                k: arg(0),
                len: arg(1),
                rho: nums[2] as u32,
                seed: nums[3],
            },
            _ => return Err(bad("unknown family or wrong parameter count")),
        };
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub graph: Graph,
    pub cover: GeodesicCover,
}

pub fn generate(spec: InstanceSpec) -> Result<Instance> {
    let invalid = |msg: &str| Err(Error::Precondition(format!("{spec}: {msg}")));
    let (graph, cover) = match spec {
        InstanceSpec::Path { n } => {
            if n == 0 {
                return invalid("need at least one vertex");
            }
            let all: Vec<Vertex> = (0..n).collect();
            (path(n), GeodesicCover::new(0, vec![Walk::new(all)?]))
        }
        InstanceSpec::Cycle { n } => {
            if n < 3 {
                return invalid("need at least three vertices");
            }
            let h = n / 2;
            let first: Vec<Vertex> = (0..=h).collect();
            let start = if n % 2 == 0 { h } else { h + 1 };
            let second: Vec<Vertex> = (start..n).chain([0]).collect();
            let cover = GeodesicCover::new(0, vec![Walk::new(first)?, Walk::new(second)?]);
            (cycle(n), cover)
        }
        InstanceSpec::Grid { w, h, rho } => {
            if w == 0 || h == 0 {
                return invalid("need positive dimensions");
            }
            let mut rows = Vec::new();
            let mut y = (rho as usize).min(h - 1);
            loop {
                rows.push(y);
                if y + rho as usize >= h - 1 {
                    break;
                }
                y = (y + 2 * rho as usize + 1).min(h - 1);
            }
            let paths = rows
                .into_iter()
                .map(|y| Walk::new((0..w).map(|x| y * w + x).collect()))
                .collect::<Result<_>>()?;
            (grid(w, h), GeodesicCover::new(rho, paths))
        }
        InstanceSpec::Cross { arms, len } => {
            if arms == 0 || len == 0 {
                return invalid("need at least one arm of positive length");
            }
            let arm = |a: usize| -> Vec<Vertex> { (0..len).map(|p| 1 + a * len + p).collect() };
            let mut paths = Vec::new();
            for pair in (0..arms).collect::<Vec<_>>().chunks(2) {
                let mut vs: Vec<Vertex> = arm(pair[0]).into_iter().rev().collect();
                vs.push(0);
                if let Some(&b) = pair.get(1) {
                    vs.extend(arm(b));
                }
                paths.push(Walk::new(vs)?);
            }
            (cross(arms, len), GeodesicCover::new(0, paths))
        }
        InstanceSpec::RandomCoverUnion { k, len, rho, seed } => {
            if k == 0 {
                return invalid("need at least one geodesic");
            }
            random_cover_union(k, len, rho, seed)?
        }
    };
    Ok(Instance { spec, graph, cover })
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("valid path")
}

pub fn cycle(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
}

/// `w` by `h` grid; vertex `(x, y)` has id `y * w + x`.
pub fn grid(w: usize, h: usize) -> Graph {
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = y * w + x;
            if x + 1 < w {
                edges.push((v, v + 1));
            }
            if y + 1 < h {
                edges.push((v, v + w));
            }
        }
    }
    Graph::from_edges(w * h, edges).expect("valid grid")
}

/// Subdivided star: center 0 and `arms` paths of `len` vertices; arm `a`
/// holds ids `1 + a*len ..= (a+1)*len`, innermost first.
pub fn cross(arms: usize, len: usize) -> Graph {
    let mut edges = Vec::new();
    for a in 0..arms {
        let base = 1 + a * len;
        if len > 0 {
            edges.push((0, base));
        }
        for p in 1..len {
            edges.push((base + p - 1, base + p));
        }
    }
    Graph::from_edges(1 + arms * len, edges).expect("valid cross")
}

/// Every edge joins vertices whose levels differ by at most one, and each
/// planted path climbs levels `0..=len` one per step, so the planted paths
/// stay geodesic.
fn random_cover_union(
    k: usize,
    len: usize,
    rho: u32,
    seed: u64,
) -> Result<(Graph, GeodesicCover)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let on_path = |j: usize, t: usize| j * (len + 1) + t;
    let mut n = k * (len + 1);
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    for j in 0..k {
        for t in 1..=len {
            edges.push((on_path(j, t - 1), on_path(j, t)));
        }
    }
    let chord = |rng: &mut ChaCha8Rng, j: usize, other: usize, edges: &mut Vec<_>| {
        let t = rng.gen_range(0..=len);
        let lo = t.saturating_sub(1);
        let hi = (t + 1).min(len);
        let s = rng.gen_range(lo..=hi);
        let e = (on_path(j, t).min(on_path(other, s)), on_path(j, t).max(on_path(other, s)));
        if !edges.contains(&e) {
            edges.push(e);
        }
    };
    for j in 1..k {
        let other = rng.gen_range(0..j);
        chord(&mut rng, j, other, &mut edges);
    }
    if k > 1 {
        let extra = rng.gen_range(0..=k * len / 3);
        for _ in 0..extra {
            let j = rng.gen_range(0..k);
            let mut other = rng.gen_range(0..k - 1);
            if other >= j {
                other += 1;
            }
            chord(&mut rng, j, other, &mut edges);
        }
    }
    if rho > 0 {
        for anchor in 0..k * (len + 1) {
            if rng.gen_bool(1.0 / 3.0) {
                let depth = rng.gen_range(1..=rho);
                let mut prev = anchor;
                for _ in 0..depth {
                    edges.push((prev, n));
                    prev = n;
                    n += 1;
                }
            }
        }
    }

    let mut relabel: Vec<Vertex> = (0..n).collect();
    relabel.shuffle(&mut rng);
    let graph = Graph::from_edges(n, edges.iter().map(|&(u, v)| (relabel[u], relabel[v])))?;
    let paths = (0..k)
        .map(|j| Walk::new((0..=len).map(|t| relabel[on_path(j, t)]).collect()))
        .collect::<Result<_>>()?;
    Ok((graph, GeodesicCover::new(rho, paths)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::verify_cover;

    #[test]
    fn planted_covers_verify() {
        let specs = [
            "path 9",
            "cycle 12",
            "cycle 7",
            "cycle 3",
            "grid 4 4 0",
            "grid 4 4 1",
            "grid 5 7 2",
            "cross 4 6",
            "cross 3 2",
            "random-cover-union 3 6 2 11",
            "random-cover-union 1 0 0 5",
            "random-cover-union 2 5 1 42",
        ];
        for s in specs {
            let inst = generate(s.parse().unwrap()).unwrap();
            let report = verify_cover(&inst.graph, &inst.cover).unwrap();
            assert!(report.ok, "{s}: {:?}", report.violations);
            assert!(inst.graph.is_connected(), "{s}");
        }
    }

    #[test]
    fn cover_sizes() {
        let k = |s: &str| generate(s.parse().unwrap()).unwrap().cover.k();
        assert_eq!(k("path 9"), 1);
        assert_eq!(k("cycle 12"), 2);
        assert_eq!(k("cross 4 6"), 2);
        assert_eq!(k("cross 3 6"), 2);
        assert_eq!(k("grid 4 4 1"), 2);
        assert_eq!(k("grid 4 4 2"), 1);
    }

    #[test]
    fn random_family_is_seed_reproducible() {
        let a = generate("random-cover-union 3 8 2 7".parse().unwrap()).unwrap();
        let b = generate("random-cover-union 3 8 2 7".parse().unwrap()).unwrap();
        let c = generate("random-cover-union 3 8 2 8".parse().unwrap()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.graph, c.graph);
    }

    #[test]
    fn spec_parsing() {
        let s: InstanceSpec = "grid 3 4".parse().unwrap();
        assert_eq!(s, InstanceSpec::Grid { w: 3, h: 4, rho: 1 });
        assert_eq!(s.to_string().parse::<InstanceSpec>().unwrap(), s);
        assert!("torus 3".parse::<InstanceSpec>().is_err());
        assert!("path x".parse::<InstanceSpec>().is_err());
        assert!(generate(InstanceSpec::Cycle { n: 2 }).is_err());
    }
}
