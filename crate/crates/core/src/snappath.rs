//! Snap-paths: shortest paths re-routed along cover geodesics.
//!
//! A snap-path alternates short connector walks with subpaths of cover
//! geodesics, using each geodesic at most once. Simplification merges short
//! segments into connectors until every remaining segment is long compared
//! to every connector.

use serde::{Deserialize, Serialize};

use crate::cover::{GeodesicCover, NearestCover};
use crate::error::{Error, Result};
use crate::graph::{is_almost_shortest, is_geodesic, Graph, Walk};

/// Connector length bounds for each simplification level: level 0 allows
/// `2ρ+1` and every further level multiplies by `2k+5`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoSequence {
    pub rho: u32,
    pub k: usize,
    pub values: Vec<u64>,
}

impl RhoSequence {
    pub fn new(rho: u32, k: usize) -> Self {
        let factor = 2 * k as u64 + 5;
        let mut values = Vec::with_capacity(k + 1);
        let mut cur = 2 * u64::from(rho) + 1;
        for _ in 0..=k {
            values.push(cur);
            cur = cur.saturating_mul(factor);
        }
        Self { rho, k, values }
    }

    pub fn at(&self, level: usize) -> u64 {
        self.values[level]
    }

    /// Segments at `level` must be strictly longer than this.
    pub fn segment_threshold(&self, level: usize) -> u64 {
        (2 * self.k as u64 + 3).saturating_mul(self.at(level))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// A subpath of one cover geodesic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub geodesic: usize,
    pub direction: Direction,
    pub walk: Walk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Raw,
    Simplified(usize),
}

/// `connectors` always holds one more entry than `segments`; connector `i`
/// precedes segment `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapPath {
    pub connectors: Vec<Walk>,
    pub segments: Vec<Segment>,
    pub level: Level,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SnapType {
    pub steps: Vec<(usize, Direction)>,
    pub level: usize,
}

impl SnapPath {
    pub fn start(&self) -> usize {
        self.connectors[0].start()
    }

    pub fn end(&self) -> usize {
        self.connectors[self.connectors.len() - 1].end()
    }

    /// Joins all pieces in order into one walk.
    pub fn concat(&self) -> Result<Walk> {
        let mut walk = self.connectors[0].clone();
        for (seg, conn) in self.segments.iter().zip(&self.connectors[1..]) {
            walk = walk.concat(&seg.walk)?.concat(conn)?;
        }
        Ok(walk)
    }

    /// Length of the concatenation.
    pub fn len(&self) -> usize {
        self.connectors.iter().map(Walk::len).sum::<usize>()
            + self.segments.iter().map(|s| s.walk.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn type_of(&self) -> Result<SnapType> {
        match self.level {
            Level::Raw => Err(Error::Precondition(
                "type is defined for simplified snap-paths only".into(),
            )),
            Level::Simplified(level) => Ok(SnapType {
                steps: self.segments.iter().map(|s| (s.geodesic, s.direction)).collect(),
                level,
            }),
        }
    }

    /// Checks the structure shared by all levels: pieces join up, every
    /// segment lies on its declared geodesic in the declared direction, and
    /// no geodesic is used twice. Returns the list of problems found.
    pub fn structural_violations(&self, g: &Graph, c: &GeodesicCover) -> Vec<String> {
        let mut out = Vec::new();
        if self.connectors.len() != self.segments.len() + 1 {
            out.push(format!(
                "{} connectors for {} segments",
                self.connectors.len(),
                self.segments.len()
            ));
            return out;
        }
        for (i, w) in self.connectors.iter().enumerate() {
            if let Err(e) = w.check_in(g) {
                out.push(format!("connector {i}: {e}"));
            }
        }
        let mut seen = vec![false; c.k()];
        for (i, seg) in self.segments.iter().enumerate() {
            if self.connectors[i].end() != seg.walk.start() {
                out.push(format!("connector {i} does not end where segment {i} starts"));
            }
            if seg.walk.end() != self.connectors[i + 1].start() {
                out.push(format!("segment {i} does not end where connector {} starts", i + 1));
            }
            let Some(path) = c.paths.get(seg.geodesic) else {
                out.push(format!("segment {i}: no geodesic {}", seg.geodesic));
                continue;
            };
            if std::mem::replace(&mut seen[seg.geodesic], true) {
                out.push(format!("geodesic {} used twice", seg.geodesic));
            }
            if !lies_on(path, seg) {
                out.push(format!(
                    "segment {i} is not a {:?} subpath of geodesic {}",
                    seg.direction, seg.geodesic
                ));
            }
        }
        out
    }

    /// Problems with the unsimplified length bounds.
    pub fn raw_violations(&self, g: &Graph, c: &GeodesicCover) -> Vec<String> {
        let mut out = self.structural_violations(g, c);
        if !out.is_empty() {
            return out;
        }
        let rho = c.rho as usize;
        let last = self.connectors.len() - 1;
        for (i, w) in self.connectors.iter().enumerate() {
            let cap = if i == 0 || i == last { rho } else { 2 * rho + 1 };
            if w.len() > cap {
                out.push(format!("connector {i} has length {} > {cap}", w.len()));
            }
        }
        out
    }

    /// Problems with the bounds of the recorded simplification level.
    pub fn simplified_violations(&self, g: &Graph, c: &GeodesicCover) -> Vec<String> {
        let mut out = self.structural_violations(g, c);
        let Level::Simplified(level) = self.level else {
            out.push("snap-path is not simplified".into());
            return out;
        };
        if !out.is_empty() {
            return out;
        }
        let seq = RhoSequence::new(c.rho, c.k());
        if level > c.k() {
            out.push(format!("level {level} exceeds {}", c.k()));
            return out;
        }
        for (i, w) in self.connectors.iter().enumerate() {
            if w.len() as u64 > seq.at(level) {
                out.push(format!(
                    "connector {i} has length {} > {}",
                    w.len(),
                    seq.at(level)
                ));
            }
        }
        for (i, s) in self.segments.iter().enumerate() {
            if s.walk.len() as u64 <= seq.segment_threshold(level) {
                out.push(format!(
                    "segment {i} has length {} <= {}",
                    s.walk.len(),
                    seq.segment_threshold(level)
                ));
            }
        }
        out
    }
}

fn lies_on(path: &Walk, seg: &Segment) -> bool {
    let Some(i) = path.position(seg.walk.start()) else {
        return false;
    };
    let len = seg.walk.len();
    let j = match seg.direction {
        Direction::Forward => i + len,
        Direction::Backward if len <= i => i - len,
        Direction::Backward => return false,
    };
    j < path.vertices().len() && path.slice(i, j) == seg.walk
}

/// Snaps shortest paths onto a fixed cover.
#[derive(Debug, Clone)]
pub struct Snapper<'a> {
    g: &'a Graph,
    cover: &'a GeodesicCover,
    nearest: NearestCover,
}

impl<'a> Snapper<'a> {
    pub fn new(g: &'a Graph, cover: &'a GeodesicCover) -> Result<Self> {
        cover.validate(g)?;
        let nearest = NearestCover::new(g, cover)?;
        Ok(Self { g, cover, nearest })
    }

    pub fn cover(&self) -> &GeodesicCover {
        self.cover
    }

    pub fn nearest(&self) -> &NearestCover {
        &self.nearest
    }

    /// Snaps a shortest path. Scanning from the start, each round takes the
    /// geodesic nearest to the current vertex, jumps to the last vertex of
    /// the remaining path with the same nearest geodesic, slides along that
    /// geodesic between the two projections, and continues after it.
    pub fn snap(&self, p: &Walk) -> Result<SnapPath> {
        let g = self.g;
        if !is_geodesic(g, p)? {
            return Err(Error::NotGeodesic {
                start: p.start(),
                end: p.end(),
                length: p.len(),
                distance: g.distance(p.start(), p.end()),
            });
        }
        let vs = p.vertices();
        if vs.len() == 1 {
            return Ok(SnapPath {
                connectors: vec![Walk::single(vs[0])],
                segments: Vec::new(),
                level: Level::Raw,
            });
        }
        let near = &self.nearest;
        let mut connectors = Vec::new();
        let mut segments = Vec::new();
        let mut carried: Option<Walk> = None;
        let mut s = 0;
        loop {
            let u = vs[s];
            let geo = near.geodesic(u);
            let t = (s..vs.len())
                .rev()
                .find(|&t| near.geodesic(vs[t]) == geo)
                .expect("index s qualifies");
            let v = vs[t];
            let to_cover = near.path_to_cover(g, u);
            connectors.push(match carried.take() {
                Some(w) => w.concat(&to_cover)?,
                None => to_cover,
            });
            let (i, j) = (near.position(u), near.position(v));
            segments.push(Segment {
                geodesic: geo,
                direction: if i <= j {
                    Direction::Forward
                } else {
                    Direction::Backward
                },
                walk: self.cover.paths[geo].slice(i, j),
            });
            let back = near.path_to_cover(g, v).reversed();
            if t + 1 == vs.len() {
                connectors.push(back);
                break;
            }
            carried = Some(back.concat(&Walk::new(vec![v, vs[t + 1]])?)?);
            s = t + 1;
        }
        Ok(SnapPath {
            connectors,
            segments,
            level: Level::Raw,
        })
    }
}

/// Convenience wrapper building a one-off [`Snapper`].
pub fn snap(g: &Graph, c: &GeodesicCover, p: &Walk) -> Result<SnapPath> {
    Snapper::new(g, c)?.snap(p)
}

/// Merges short segments into their neighbouring connectors, lowest index
/// first, raising the level once per merge until every segment clears the
/// threshold of the current level. The concatenation is unchanged.
pub fn simplify(sp: &SnapPath, k: usize, rho: u32) -> Result<SnapPath> {
    if sp.level != Level::Raw {
        return Err(Error::Precondition("snap-path is already simplified".into()));
    }
    if sp.segments.len() > k {
        return Err(Error::Precondition(format!(
            "{} segments exceed k = {k}",
            sp.segments.len()
        )));
    }
    let seq = RhoSequence::new(rho, k);
    let mut connectors = sp.connectors.clone();
    let mut segments = sp.segments.clone();
    let mut level = 0;
    while let Some(j) = segments
        .iter()
        .position(|s| s.walk.len() as u64 <= seq.segment_threshold(level))
    {
        let seg = segments.remove(j);
        let after = connectors.remove(j + 1);
        connectors[j] = connectors[j].concat(&seg.walk)?.concat(&after)?;
        level += 1;
    }
    Ok(SnapPath {
        connectors,
        segments,
        level: Level::Simplified(level),
    })
}

/// Distance bound for endpoints of two same-type snap-paths at `level`
/// whose lengths differ by at most `gamma`.
pub fn proximity_bound(k: usize, rho: u32, level: usize, gamma: u64) -> u64 {
    let seq = RhoSequence::new(rho, k);
    let (k, rho, rl) = (k as u64, u64::from(rho), seq.at(level));
    let inner = (4 * k * rho)
        .saturating_add(rl.saturating_mul(2))
        .saturating_add((2 * k).saturating_mul(rl));
    gamma
        .saturating_add(k.saturating_mul(inner))
        .saturating_add((6 * k + 4).saturating_mul(rl))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdCheck {
    /// Multiplier of the level's connector bound.
    pub factor: u64,
    /// Whether every segment of both paths is longer than `factor * ρ_ℓ`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProximityReport {
    pub bound: u64,
    pub actual: u32,
    pub ok: bool,
    pub thresholds: Vec<ThresholdCheck>,
}

/// Checks that two simplified snap-paths with a common start and type end
/// close together.
pub fn check_same_type_proximity(
    g: &Graph,
    c: &GeodesicCover,
    a: &SnapPath,
    b: &SnapPath,
    gamma: u64,
) -> Result<ProximityReport> {
    let fail = |m: String| Err(Error::Precondition(m));
    let (ta, tb) = (a.type_of()?, b.type_of()?);
    if ta != tb {
        return fail("snap-paths have different types".into());
    }
    if a.start() != b.start() {
        return fail(format!("starts differ: {} vs {}", a.start(), b.start()));
    }
    let diff = a.len().abs_diff(b.len()) as u64;
    if diff > gamma {
        return fail(format!("length difference {diff} exceeds gamma {gamma}"));
    }
    let slack = 4 * c.k() * c.rho as usize;
    for (name, sp) in [("first", a), ("second", b)] {
        let walk = sp.concat()?;
        if !is_almost_shortest(g, &walk, slack)? {
            return fail(format!("{name} snap-path is not {slack}-almost shortest"));
        }
    }
    let seq = RhoSequence::new(c.rho, c.k());
    let rl = seq.at(ta.level);
    let k = c.k() as u64;
    let shortest = a
        .segments
        .iter()
        .chain(&b.segments)
        .map(|s| s.walk.len() as u64)
        .min();
    let thresholds = [2 * k + 3, 2 * k + 2, k + 2]
        .into_iter()
        .map(|factor| ThresholdCheck {
            factor,
            holds: shortest.is_none_or(|m| m > factor.saturating_mul(rl)),
        })
        .collect();
    let bound = proximity_bound(c.k(), c.rho, ta.level, gamma);
    let actual = g.distance(a.end(), b.end());
    Ok(ProximityReport {
        bound,
        actual,
        ok: u64::from(actual) <= bound,
        thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{self, generate, InstanceSpec};
    use crate::graph::ShortestPathTree;
    use crate::oracle::brute_all_shortest_paths;
    use proptest::prelude::*;

    fn walk(vs: &[usize]) -> Walk {
        Walk::new(vs.to_vec()).unwrap()
    }

    /// Cross with arms of length 3: horizontal arms 0 and 1, vertical arms 2
    /// and 3. Arm `a` holds ids `1+3a..=3+3a`, innermost first.
    fn small_cross() -> (Graph, GeodesicCover) {
        let inst = generate(InstanceSpec::Cross { arms: 4, len: 3 }).unwrap();
        (inst.graph, inst.cover)
    }

    #[test]
    fn rho_sequence_values() {
        let s = RhoSequence::new(1, 2);
        assert_eq!(s.values, vec![3, 27, 243]);
        assert_eq!(s.segment_threshold(0), 21);
        assert_eq!(RhoSequence::new(0, 1).values, vec![1, 7]);
    }

    #[test]
    fn path_on_its_own_cover() {
        let inst = generate(InstanceSpec::Path { n: 9 }).unwrap();
        let p = walk(&(0..9).collect::<Vec<_>>());
        let sp = snap(&inst.graph, &inst.cover, &p).unwrap();
        assert_eq!(sp.segments.len(), 1);
        assert_eq!(sp.segments[0].walk, p);
        assert!(sp.connectors.iter().all(Walk::is_trivial));
        assert_eq!(sp.concat().unwrap(), p);
        assert_eq!(sp.len(), 8);
        let simple = simplify(&sp, 1, 0).unwrap();
        assert_eq!(simple.type_of().unwrap().steps, vec![(0, Direction::Forward)]);
        assert_eq!(simple.level, Level::Simplified(0));
    }

    #[test]
    fn cross_corner_to_corner() {
        let (g, c) = small_cross();
        // outer tip of arm 0, through the center, to the tip of arm 3
        let p = walk(&[3, 2, 1, 0, 10, 11, 12]);
        let sp = snap(&g, &c, &p).unwrap();
        assert!(sp.raw_violations(&g, &c).is_empty());
        let steps: Vec<_> = sp.segments.iter().map(|s| (s.geodesic, s.direction)).collect();
        assert_eq!(steps, vec![(0, Direction::Forward), (1, Direction::Forward)]);
        assert!(sp.connectors.iter().all(|w| w.len() <= 1));
        let total: usize = sp.connectors.iter().map(Walk::len).sum::<usize>()
            + sp.segments.iter().map(|s| s.walk.len()).sum::<usize>();
        assert_eq!(sp.concat().unwrap().len(), total);
        assert_eq!(sp.start(), 3);
        assert_eq!(sp.end(), 12);
    }

    #[test]
    fn single_vertex_snap() {
        let (g, c) = small_cross();
        let sp = snap(&g, &c, &Walk::single(5)).unwrap();
        assert!(sp.segments.is_empty());
        assert_eq!(sp.concat().unwrap(), Walk::single(5));
        let simple = simplify(&sp, c.k(), c.rho).unwrap();
        assert_eq!(simple.level, Level::Simplified(0));
        assert!(simple.type_of().unwrap().steps.is_empty());
    }

    #[test]
    fn rejects_non_geodesic() {
        let g = gen::cycle(6);
        let c = generate(InstanceSpec::Cycle { n: 6 }).unwrap().cover;
        let long_way = walk(&[0, 5, 4, 3, 2]);
        assert!(matches!(snap(&g, &c, &long_way), Err(Error::NotGeodesic { .. })));
    }

    #[test]
    fn short_segments_are_merged() {
        let (g, c) = small_cross();
        let p = walk(&[3, 2, 1, 0, 10, 11, 12]);
        let sp = snap(&g, &c, &p).unwrap();
        let simple = simplify(&sp, c.k(), c.rho).unwrap();
        // k = 2, rho = 0: thresholds are 7 then 63, both segments are shorter
        assert_eq!(simple.level, Level::Simplified(2));
        assert!(simple.segments.is_empty());
        assert_eq!(simple.connectors.len(), 1);
        assert_eq!(simple.concat().unwrap(), sp.concat().unwrap());
        assert!(simple.simplified_violations(&g, &c).is_empty());
    }

    #[test]
    fn one_short_segment_raises_level_once() {
        let inst = generate(InstanceSpec::Cross { arms: 4, len: 70 }).unwrap();
        let (g, c) = (inst.graph, inst.cover);
        let mut vs: Vec<usize> = (0..=70).rev().collect();
        vs.push(1 + 3 * 70);
        let sp = snap(&g, &c, &walk(&vs)).unwrap();
        assert_eq!(sp.segments.len(), 2);
        let simple = simplify(&sp, c.k(), c.rho).unwrap();
        assert_eq!(simple.level, Level::Simplified(1));
        assert_eq!(simple.segments.len(), 1);
        assert!(simple.connectors[1].len() <= 9);
        assert_eq!(simple.concat().unwrap(), sp.concat().unwrap());
        assert!(simple.simplified_violations(&g, &c).is_empty());
    }

    #[test]
    fn long_segment_survives() {
        let inst = generate(InstanceSpec::Cross { arms: 2, len: 12 }).unwrap();
        let (g, c) = (inst.graph, inst.cover);
        let tree = ShortestPathTree::new(&g, 12).unwrap();
        let p = tree.path_to(24).unwrap();
        let sp = snap(&g, &c, &p).unwrap();
        let simple = simplify(&sp, c.k(), c.rho).unwrap();
        assert_eq!(simple, SnapPath { level: Level::Simplified(0), ..sp });
    }

    #[test]
    fn proximity_bound_formula() {
        assert_eq!(proximity_bound(2, 1, 0, 0), 100);
        assert_eq!(proximity_bound(40, 2, 40, 0), u64::MAX);
        assert_eq!(proximity_bound(1, 0, 0, 3), 3 + 4 + 10);
    }

    #[test]
    fn proximity_of_identical_paths() {
        let (g, c) = small_cross();
        let p = walk(&[3, 2, 1, 0, 10, 11, 12]);
        let sp = simplify(&snap(&g, &c, &p).unwrap(), c.k(), c.rho).unwrap();
        let r = check_same_type_proximity(&g, &c, &sp, &sp, 0).unwrap();
        assert_eq!(r.actual, 0);
        assert!(r.ok);
    }

    #[test]
    fn proximity_on_grid_shortest_paths() {
        let inst = generate(InstanceSpec::Grid { w: 4, h: 4, rho: 1 }).unwrap();
        let (g, c) = (inst.graph, inst.cover);
        let snapper = Snapper::new(&g, &c).unwrap();
        let paths = brute_all_shortest_paths(&g, 0, 15, 100).unwrap();
        let simple: Vec<_> = paths
            .iter()
            .map(|p| simplify(&snapper.snap(p).unwrap(), c.k(), c.rho).unwrap())
            .collect();
        let mut compared = 0;
        for a in &simple {
            for b in &simple {
                if a.type_of().unwrap() == b.type_of().unwrap() {
                    let gamma = a.len().abs_diff(b.len()) as u64;
                    assert!(check_same_type_proximity(&g, &c, a, b, gamma).unwrap().ok);
                    compared += 1;
                }
            }
        }
        assert!(compared >= simple.len());
    }

    #[test]
    fn proximity_preconditions_are_named() {
        let (g, c) = small_cross();
        let a = simplify(&snap(&g, &c, &walk(&[3, 2, 1])).unwrap(), 2, 0).unwrap();
        let b = simplify(&snap(&g, &c, &walk(&[6, 5, 4])).unwrap(), 2, 0).unwrap();
        let err = check_same_type_proximity(&g, &c, &a, &b, 5).unwrap_err();
        assert!(err.to_string().contains("starts differ") || err.to_string().contains("types"));
        let raw = snap(&g, &c, &walk(&[3, 2, 1])).unwrap();
        assert!(check_same_type_proximity(&g, &c, &raw, &raw, 0).is_err());
    }

    #[test]
    fn structural_checker_catches_reuse() {
        let (g, c) = small_cross();
        let mut sp = snap(&g, &c, &walk(&[3, 2, 1, 0, 10, 11, 12])).unwrap();
        sp.segments[1].geodesic = 0;
        assert!(!sp.structural_violations(&g, &c).is_empty());
    }

    fn snap_cases() -> impl Strategy<Value = (InstanceSpec, usize, usize)> {
        let spec = prop_oneof![
            (3usize..14).prop_map(|n| InstanceSpec::Cycle { n }),
            (2usize..5, 2usize..5, 0u32..3).prop_map(|(w, h, rho)| InstanceSpec::Grid { w, h, rho }),
            (1usize..5, 1usize..4).prop_map(|(arms, len)| InstanceSpec::Cross { arms, len }),
            (1usize..4, 1usize..6, 0u32..3, any::<u64>())
                .prop_map(|(k, len, rho, seed)| InstanceSpec::RandomCoverUnion { k, len, rho, seed }),
        ];
        (spec, any::<usize>(), any::<usize>())
    }

    proptest! {
        #[test]
        fn snapping_respects_bounds((spec, a, b) in snap_cases()) {
            let inst = generate(spec).unwrap();
            let (g, c) = (&inst.graph, &inst.cover);
            let (u, v) = (a % g.n(), b % g.n());
            let snapper = Snapper::new(g, c).unwrap();
            for p in brute_all_shortest_paths(g, u, v, 50).unwrap_or_default() {
                let sp = snapper.snap(&p).unwrap();
                prop_assert!(sp.raw_violations(g, c).is_empty(), "{:?}", sp.raw_violations(g, c));
                prop_assert_eq!((sp.start(), sp.end()), (u, v));
                prop_assert!(sp.len().abs_diff(p.len()) <= 4 * c.rho as usize * c.k());
                let simple = simplify(&sp, c.k(), c.rho).unwrap();
                prop_assert_eq!(simple.concat().unwrap(), sp.concat().unwrap());
                prop_assert!(simple.simplified_violations(g, c).is_empty());
                let Level::Simplified(l) = simple.level else { unreachable!() };
                prop_assert!(l <= sp.segments.len());
            }
        }
    }
}
