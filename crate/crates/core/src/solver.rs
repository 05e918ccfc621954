//! Exact dynamic programs over a distance tree-partition-decomposition.
//!
//! With a decomposition valid at distance `r`, [`solve_dist_is`] finds a
//! largest set of vertices pairwise more than `2r` apart and
//! [`solve_dist_ds`] a smallest set with every vertex within `r` of a
//! member. The state of a node `x` is the part of the solution within `r`
//! of its bag (its *vicinity*); the size of such parts is bounded in terms
//! of the tree degree and the bag certificates, which keeps the tables
//! polynomial for fixed parameters.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{greedy_certificate, PartitionDecomposition};
use crate::error::{Error, Result};
use crate::graph::{bfs_bounded, set_ball, Graph, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Maximum set with pairwise distances above `2r`.
    Independent,
    /// Minimum set within distance `r` of every vertex.
    Dominating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Distance parameter; defaults to the decomposition's own and may not
    /// exceed it.
    pub rho: Option<u32>,
    /// Largest number of states allowed at any node.
    pub max_states: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rho: None,
            max_states: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub value: usize,
    pub witness: Vec<Vertex>,
}

/// The decomposition tree rooted at a node, with parent and child links.
#[derive(Debug, Clone)]
pub struct RootedDecomposition<'a> {
    pub pd: &'a PartitionDecomposition,
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    /// Nodes in breadth-first order from the root.
    pub order: Vec<usize>,
}

impl<'a> RootedDecomposition<'a> {
    pub fn new(pd: &'a PartitionDecomposition, root: usize) -> Result<Self> {
        if let Some(reason) = pd.tree.defect() {
            return Err(Error::Validation(format!("decomposition tree: {reason}")));
        }
        if pd.bags.len() != pd.tree.nodes || pd.certificates.len() != pd.bags.len() {
            return Err(Error::Validation("bag, node and certificate counts differ".into()));
        }
        if root >= pd.tree.nodes {
            return Err(Error::Precondition(format!("root {root} is not a node")));
        }
        let adj = pd.tree.adjacency();
        let mut parent = vec![None; pd.tree.nodes];
        let mut children = vec![Vec::new(); pd.tree.nodes];
        let mut order = vec![root];
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            for &y in &adj[x] {
                if y != root && parent[y].is_none() {
                    parent[y] = Some(x);
                    children[x].push(y);
                    order.push(y);
                }
            }
            i += 1;
        }
        Ok(Self {
            pd,
            root,
            parent,
            children,
            order,
        })
    }

    /// Vertices in the bags of `x` and all its descendants.
    pub fn subtree_vertices(&self, x: usize) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut stack = vec![x];
        while let Some(y) = stack.pop() {
            out.extend(&self.pd.bags[y]);
            stack.extend(&self.children[y]);
        }
        out.sort_unstable();
        out
    }
}

/// Parameters fixed for one solver run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateBounds {
    pub rho: u32,
    /// Largest number of radius-`rho` balls needed for one bag, as
    /// certified.
    pub k: usize,
    /// Maximum tree degree.
    pub delta: usize,
    /// Largest state size admitted.
    pub cap: usize,
}

/// Filled DP tables; `values[x][i]` belongs to `states[x][i]` and is `None`
/// where no compatible choice exists below.
#[derive(Debug, Clone)]
pub struct Tables {
    pub mode: Mode,
    pub bounds: StateBounds,
    pub states: Vec<Vec<Vec<Vertex>>>,
    pub values: Vec<Vec<Option<usize>>>,
    /// Per node and state, the chosen state index for each child.
    choices: Vec<Vec<Vec<u32>>>,
}

struct Context<'a> {
    rd: RootedDecomposition<'a>,
    mode: Mode,
    bounds: StateBounds,
    /// Per node, membership of its vicinity.
    vicinity: Vec<FixedBitSet>,
    /// Per vertex, the sorted vertices in conflict with it: within `2r` for
    /// independence, within `r` for domination.
    near: Vec<Vec<Vertex>>,
    max_states: usize,
}

impl Context<'_> {
    fn conflict(&self, a: Vertex, b: Vertex) -> bool {
        self.near[a].binary_search(&b).is_ok()
    }

    fn restrict(&self, set: &[Vertex], node: usize) -> Vec<Vertex> {
        set.iter().copied().filter(|&v| self.vicinity[node].contains(v)).collect()
    }
}

fn check_partition(g: &Graph, pd: &PartitionDecomposition) -> Result<()> {
    let mut seen = vec![false; g.n()];
    for bag in &pd.bags {
        for &v in bag {
            g.check_vertex(v)?;
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::Validation(format!("vertex {v} is in several bags")));
            }
        }
    }
    match seen.iter().position(|&s| !s) {
        Some(v) => Err(Error::Validation(format!("vertex {v} is in no bag"))),
        None => Ok(()),
    }
}

fn build_context<'a>(
    g: &'a Graph,
    pd: &'a PartitionDecomposition,
    mode: Mode,
    opts: SolverOptions,
) -> Result<Context<'a>> {
    check_partition(g, pd)?;
    let rho = opts.rho.unwrap_or(pd.rho);
    if rho > pd.rho {
        return Err(Error::Precondition(format!(
            "distance {rho} exceeds the decomposition's {}",
            pd.rho
        )));
    }
    let rd = RootedDecomposition::new(pd, 0)?;
    let k = pd
        .bags
        .iter()
        .zip(&pd.certificates)
        .map(|(bag, cert)| {
            if cert.radius <= rho {
                cert.centers.len()
            } else {
                bag.len()
            }
        })
        .max()
        .unwrap_or(0);
    let delta = pd.degree();
    let cap = match mode {
        Mode::Independent => (delta + 1) * k,
        Mode::Dominating => {
            // a minimum solution is no larger than any dominating set
            let all: Vec<Vertex> = (0..g.n()).collect();
            let upper = greedy_certificate(g, &all, rho).centers.len();
            (k * (delta * delta + 1)).min(upper)
        }
    };
    let vicinity = pd
        .bags
        .par_iter()
        .map(|bag| {
            let mut bits = FixedBitSet::with_capacity(g.n());
            for v in set_ball(g, bag, rho) {
                bits.insert(v);
            }
            bits
        })
        .collect();
    let reach = match mode {
        Mode::Independent => 2 * rho,
        Mode::Dominating => rho,
    };
    let near = (0..g.n())
        .into_par_iter()
        .map(|v| {
            let dist = bfs_bounded(g, &[v], reach);
            (0..g.n()).filter(|&w| dist[w] <= reach).collect()
        })
        .collect();
    Ok(Context {
        rd,
        mode,
        bounds: StateBounds {
            rho,
            k,
            delta,
            cap,
        },
        vicinity,
        near,
        max_states: opts.max_states,
    })
}

fn budget_error(count: usize, limit: usize) -> Error {
    Error::BudgetExceeded {
        what: "DP state",
        count,
        limit,
    }
}

/// All admissible states at node `x`, each sorted, in lexicographic order.
fn enumerate(ctx: &Context, x: usize) -> Result<Vec<Vec<Vertex>>> {
    let ground: Vec<Vertex> = ctx.vicinity[x].ones().collect();
    let cap = ctx.bounds.cap;
    let limit = ctx.max_states;
    let mut out = Vec::new();
    match ctx.mode {
        Mode::Independent => {
            // conflict-free subsets, grown in index order
            fn grow(
                ctx: &Context,
                ground: &[Vertex],
                from: usize,
                chosen: &mut Vec<Vertex>,
                cap: usize,
                limit: usize,
                out: &mut Vec<Vec<Vertex>>,
            ) -> Result<()> {
                out.push(chosen.clone());
                if out.len() > limit {
                    return Err(budget_error(out.len(), limit));
                }
                if chosen.len() == cap {
                    return Ok(());
                }
                for i in from..ground.len() {
                    let v = ground[i];
                    if chosen.iter().all(|&a| !ctx.conflict(a, v)) {
                        chosen.push(v);
                        grow(ctx, ground, i + 1, chosen, cap, limit, out)?;
                        chosen.pop();
                    }
                }
                Ok(())
            }
            grow(ctx, &ground, 0, &mut Vec::new(), cap, limit, &mut out)?;
        }
        Mode::Dominating => {
            let bag = &ctx.rd.pd.bags[x];
            let mut slot = HashMap::with_capacity(bag.len());
            for (i, &v) in bag.iter().enumerate() {
                slot.insert(v, i);
            }
            let masks: Vec<FixedBitSet> = ground
                .iter()
                .map(|&v| {
                    let mut bits = FixedBitSet::with_capacity(bag.len());
                    for w in &ctx.near[v] {
                        if let Some(&i) = slot.get(w) {
                            bits.insert(i);
                        }
                    }
                    bits
                })
                .collect();
            // suffix[i]: everything ground[i..] could still dominate
            let mut suffix = vec![FixedBitSet::with_capacity(bag.len()); ground.len() + 1];
            for i in (0..ground.len()).rev() {
                suffix[i] = suffix[i + 1].clone();
                suffix[i].union_with(&masks[i]);
            }
            struct Walk<'s> {
                ground: &'s [Vertex],
                masks: &'s [FixedBitSet],
                suffix: &'s [FixedBitSet],
                full: usize,
                cap: usize,
                limit: usize,
            }
            fn step(
                w: &Walk,
                i: usize,
                chosen: &mut Vec<Vertex>,
                covered: &FixedBitSet,
                out: &mut Vec<Vec<Vertex>>,
            ) -> Result<()> {
                if covered.union_count(&w.suffix[i]) < w.full {
                    return Ok(());
                }
                if i == w.ground.len() {
                    out.push(chosen.clone());
                    if out.len() > w.limit {
                        return Err(budget_error(out.len(), w.limit));
                    }
                    return Ok(());
                }
                if chosen.len() < w.cap {
                    let mut next = covered.clone();
                    next.union_with(&w.masks[i]);
                    chosen.push(w.ground[i]);
                    step(w, i + 1, chosen, &next, out)?;
                    chosen.pop();
                }
                step(w, i + 1, chosen, covered, out)
            }
            let walk = Walk {
                ground: &ground,
                masks: &masks,
                suffix: &suffix,
                full: bag.len(),
                cap,
                limit,
            };
            step(
                &walk,
                0,
                &mut Vec::new(),
                &FixedBitSet::with_capacity(bag.len()),
                &mut out,
            )?;
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Child states grouped by their restriction to the parent's vicinity.
enum ChildIndex {
    /// Best score per key, with its state index.
    Best(HashMap<Vec<Vertex>, (usize, u32)>),
    /// All feasible scores per key, best first.
    Ranked(HashMap<Vec<Vertex>, Vec<(usize, u32)>>),
}

fn index_child(ctx: &Context, tables: &Tables, parent: usize, y: usize) -> ChildIndex {
    let states = &tables.states[y];
    let values = &tables.values[y];
    let entries = states.iter().zip(values).enumerate().filter_map(|(i, (b, v))| {
        v.map(|val| {
            let key = ctx.restrict(b, parent);
            let score = b.len() - key.len() + val;
            (key, score, i as u32)
        })
    });
    match ctx.mode {
        Mode::Dominating => {
            let mut best: HashMap<Vec<Vertex>, (usize, u32)> = HashMap::new();
            for (key, score, i) in entries {
                best.entry(key)
                    .and_modify(|cur| {
                        if (score, i) < *cur {
                            *cur = (score, i);
                        }
                    })
                    .or_insert((score, i));
            }
            ChildIndex::Best(best)
        }
        Mode::Independent => {
            let mut ranked: HashMap<Vec<Vertex>, Vec<(usize, u32)>> = HashMap::new();
            for (key, score, i) in entries {
                ranked.entry(key).or_default().push((score, i));
            }
            for list in ranked.values_mut() {
                list.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            }
            ChildIndex::Ranked(ranked)
        }
    }
}

/// Value of state `a` at node `x` given its children's tables, with the
/// child choices achieving it.
fn combine(
    ctx: &Context,
    tables: &Tables,
    x: usize,
    a: &[Vertex],
    indexes: &[ChildIndex],
) -> Option<(usize, Vec<u32>)> {
    let mut total = 0;
    let mut picks = Vec::with_capacity(indexes.len());
    for (&y, index) in ctx.rd.children[x].iter().zip(indexes) {
        let key = ctx.restrict(a, y);
        let (score, i) = match index {
            ChildIndex::Best(best) => *best.get(&key)?,
            ChildIndex::Ranked(ranked) => {
                let outside: Vec<Vertex> = a.iter().copied().filter(|v| key.binary_search(v).is_err()).collect();
                *ranked.get(&key)?.iter().find(|&&(_, i)| {
                    tables.states[y][i as usize]
                        .iter()
                        .filter(|b| key.binary_search(b).is_err())
                        .all(|&b| outside.iter().all(|&u| !ctx.conflict(u, b)))
                })?
            }
        };
        total += score;
        picks.push(i);
    }
    Some((total, picks))
}

fn run(ctx: &Context) -> Result<Tables> {
    let nodes = ctx.rd.pd.tree.nodes;
    let states: Vec<Vec<Vec<Vertex>>> = (0..nodes)
        .into_par_iter()
        .map(|x| enumerate(ctx, x))
        .collect::<Result<_>>()?;
    let mut tables = Tables {
        mode: ctx.mode,
        bounds: ctx.bounds.clone(),
        values: states.iter().map(|s| vec![None; s.len()]).collect(),
        choices: states.iter().map(|s| vec![Vec::new(); s.len()]).collect(),
        states,
    };
    for &x in ctx.rd.order.iter().rev() {
        let indexes: Vec<ChildIndex> = ctx.rd.children[x]
            .iter()
            .map(|&y| index_child(ctx, &tables, x, y))
            .collect();
        let filled: Vec<Option<(usize, Vec<u32>)>> = tables.states[x]
            .par_iter()
            .map(|a| combine(ctx, &tables, x, a, &indexes))
            .collect();
        for (i, entry) in filled.into_iter().enumerate() {
            if let Some((value, picks)) = entry {
                tables.values[x][i] = Some(value);
                tables.choices[x][i] = picks;
            }
        }
    }
    Ok(tables)
}

fn answer(ctx: &Context, tables: &Tables) -> Result<Solution> {
    let r = ctx.rd.root;
    let scored = tables.states[r]
        .iter()
        .zip(&tables.values[r])
        .enumerate()
        .filter_map(|(i, (a, v))| v.map(|val| (a.len() + val, i)));
    let best = match ctx.mode {
        Mode::Independent => scored.min_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1))),
        Mode::Dominating => scored.min(),
    };
    let (value, root_state) =
        best.ok_or_else(|| Error::Validation("no feasible state at the root".into()))?;
    let mut witness = Vec::new();
    let mut stack = vec![(r, root_state)];
    while let Some((x, i)) = stack.pop() {
        witness.extend(&tables.states[x][i]);
        for (&y, &j) in ctx.rd.children[x].iter().zip(&tables.choices[x][i]) {
            stack.push((y, j as usize));
        }
    }
    witness.sort_unstable();
    witness.dedup();
    Ok(Solution { value, witness })
}

/// Runs the dynamic program and returns the solution with its tables.
pub fn solve_with_tables(
    g: &Graph,
    pd: &PartitionDecomposition,
    mode: Mode,
    opts: SolverOptions,
) -> Result<(Solution, Tables)> {
    let ctx = build_context(g, pd, mode, opts)?;
    let tables = run(&ctx)?;
    let solution = answer(&ctx, &tables)?;
    Ok((solution, tables))
}

pub fn solve(g: &Graph, pd: &PartitionDecomposition, mode: Mode, opts: SolverOptions) -> Result<Solution> {
    solve_with_tables(g, pd, mode, opts).map(|(s, _)| s)
}

/// Largest set of vertices pairwise more than `2r` apart.
pub fn solve_dist_is(g: &Graph, pd: &PartitionDecomposition, opts: SolverOptions) -> Result<Solution> {
    solve(g, pd, Mode::Independent, opts)
}

/// Smallest set with every vertex within `r` of a member.
pub fn solve_dist_ds(g: &Graph, pd: &PartitionDecomposition, opts: SolverOptions) -> Result<Solution> {
    solve(g, pd, Mode::Dominating, opts)
}

/// All admissible states at node `x`.
pub fn enumerate_states(
    g: &Graph,
    pd: &PartitionDecomposition,
    x: usize,
    mode: Mode,
    opts: SolverOptions,
) -> Result<Vec<Vec<Vertex>>> {
    let ctx = build_context(g, pd, mode, opts)?;
    if x >= pd.tree.nodes {
        return Err(Error::Precondition(format!("node {x} does not exist")));
    }
    enumerate(&ctx, x)
}

/// Whether state `a` at node `x` and state `b` at its child `y` agree on
/// the vertices near both bags (and, for independence, do not conflict).
pub fn compatible(
    g: &Graph,
    pd: &PartitionDecomposition,
    mode: Mode,
    opts: SolverOptions,
    (x, a): (usize, &[Vertex]),
    (y, b): (usize, &[Vertex]),
) -> Result<bool> {
    let ctx = build_context(g, pd, mode, opts)?;
    let sorted = |s: &[Vertex]| {
        let mut v = s.to_vec();
        v.sort_unstable();
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let common: Vec<Vertex> = a.iter().copied().filter(|v| b.binary_search(v).is_ok()).collect();
    if ctx.restrict(&b, x) != common || ctx.restrict(&a, y) != common {
        return Ok(false);
    }
    if mode == Mode::Independent {
        let two_rho = 2 * ctx.bounds.rho;
        let union: Vec<Vertex> = {
            let mut u = a.clone();
            u.extend(&b);
            u.sort_unstable();
            u.dedup();
            u
        };
        for (i, &u) in union.iter().enumerate() {
            let dist = bfs_bounded(g, &[u], two_rho);
            if union[i + 1..].iter().any(|&w| dist[w] <= two_rho) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Pairs of witness vertices at distance at most `2*rho` (independence), or
/// vertices farther than `rho` from the witness (domination).
pub fn witness_problems(g: &Graph, witness: &[Vertex], mode: Mode, rho: u32) -> Vec<String> {
    match mode {
        Mode::Independent => {
            let mut out = Vec::new();
            for (i, &u) in witness.iter().enumerate() {
                let dist = bfs_bounded(g, &[u], 2 * rho);
                for &w in &witness[i + 1..] {
                    if dist[w] <= 2 * rho {
                        out.push(format!("{u} and {w} are at distance {}", dist[w]));
                    }
                }
            }
            out
        }
        Mode::Dominating => {
            if witness.is_empty() {
                return if g.n() == 0 { Vec::new() } else { vec!["witness is empty".into()] };
            }
            let dist = bfs_bounded(g, witness, rho);
            (0..g.n())
                .filter(|&v| dist[v] > rho)
                .map(|v| format!("vertex {v} is not dominated"))
                .collect()
        }
    }
}
