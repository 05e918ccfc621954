//! Coarse path-decompositions of graphs covered by a few geodesics, and
//! exact dynamic programs for distance independent and dominating sets.

pub mod cover;
pub mod decomp;
pub mod error;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod pipeline;
pub mod qiso;
pub mod snappath;
pub mod solver;

pub use cover::{greedy_cover, verify_cover, GeodesicCover, NearestCover};
pub use error::{Error, Result};
pub use graph::{Graph, Vertex, Walk, INF};
pub use pipeline::{pipeline, PipelineResult};
pub use solver::{solve_dist_ds, solve_dist_is, Mode, Solution, SolverOptions};
