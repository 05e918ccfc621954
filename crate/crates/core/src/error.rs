use thiserror::Error;

use crate::graph::Vertex;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("source set is empty")]
    EmptySources,

    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),

    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(Vertex, Vertex),

    #[error("walk has no vertices")]
    EmptyWalk,

    #[error("walk step {index}: {from}-{to} is not an edge of the graph")]
    NotAnEdge { index: usize, from: Vertex, to: Vertex },

    #[error("cannot join walks: first ends at {end}, second starts at {start}")]
    EndpointMismatch { end: Vertex, start: Vertex },

    #[error("walk from {start} to {end} of length {length} is not a geodesic (distance {distance})")]
    NotGeodesic {
        start: Vertex,
        end: Vertex,
        length: usize,
        distance: u32,
    },

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} budget exceeded: {count} > {limit}")]
    BudgetExceeded {
        what: &'static str,
        count: usize,
        limit: usize,
    },

    #[error("validation failed: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
