use thiserror::Error;

use crate::mgraph::{Pair, Vertex};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {vertex_count} vertices")]
    InvalidVertex { vertex: Vertex, vertex_count: usize },

    #[error("cannot remove {requested} edge(s) from pair {pair}: only {present} present")]
    MissingEdge {
        pair: Pair,
        requested: u32,
        present: u32,
    },

    #[error("vertex count mismatch: expected {expected}, found {found}")]
    VertexCountMismatch { expected: usize, found: usize },

    #[error("color classes do not partition the base graph at pair {pair}: classes sum to {classes}, base has {base}")]
    NotAPartition { pair: Pair, classes: u32, base: u32 },

    #[error("class count mismatch: expected {expected}, found {found}")]
    ClassCountMismatch { expected: usize, found: usize },

    #[error("base graph is not {expected}")]
    BaseMismatch { expected: String },

    #[error("pair must have distinct endpoints, got {0}")]
    LoopPair(Pair),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("condition {name} fails: {reason}")]
    ConditionFailed { name: String, reason: String },

    /// A state the constructive arguments rule out was reached.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("search budget of {budget} nodes exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("no sufficiency argument covers the parameters: {0}")]
    OutOfRegime(String),

    #[error("instance exceeds the exhaustive-search cap: {0}")]
    CapExceeded(String),
}
