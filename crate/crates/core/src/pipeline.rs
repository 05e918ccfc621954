//! End-to-end run: cover → path partition → validation → exact solvers.

use serde::{Deserialize, Serialize};

use crate::cover::GeodesicCover;
use crate::decomp::{build_path_partition, validate_decomposition, PartitionDecomposition};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::solver::{solve_dist_ds, solve_dist_is, Solution, SolverOptions};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineResult {
    /// Radius of the input cover.
    pub rho: u32,
    /// Distance used by both solvers.
    pub solver_rho: u32,
    pub bags: usize,
    pub width: usize,
    pub decomposition: PartitionDecomposition,
    /// Largest set with pairwise distances above `2 * solver_rho`.
    pub independent: Solution,
    /// Smallest set within `solver_rho` of every vertex.
    pub dominating: Solution,
}

/// Builds and validates the path partition of `g` from `c`, then solves the
/// distance-`4ρ` independent set and distance-`2ρ` dominating set.
pub fn pipeline(g: &Graph, c: &GeodesicCover, max_states: usize) -> Result<PipelineResult> {
    let pd = build_path_partition(g, c)?;
    let report = validate_decomposition(g, &pd);
    if !report.ok {
        let first = report.violations.first().map(|v| v.to_string()).unwrap_or_default();
        return Err(Error::Validation(format!(
            "{} decomposition violations, first: {first}",
            report.violations.len()
        )));
    }
    let opts = SolverOptions {
        rho: Some(2 * c.rho),
        max_states,
    };
    let independent = solve_dist_is(g, &pd, opts)?;
    let dominating = solve_dist_ds(g, &pd, opts)?;
    Ok(PipelineResult {
        rho: c.rho,
        solver_rho: 2 * c.rho,
        bags: pd.bags.len(),
        width: pd.width(),
        decomposition: pd,
        independent,
        dominating,
    })
}
