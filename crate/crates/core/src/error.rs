//! Error types shared across the library.

use thiserror::Error;

/// Structural problems with a game graph or a play over it.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("game graph has no nodes")]
    Empty,
    #[error("node {node} has no outgoing edge")]
    DeadEnd { node: usize },
    #[error("node {node} lists successor {target} outside the graph")]
    DanglingSuccessor { node: usize, target: usize },
    #[error("owner/successor list count {lists} does not match node count {nodes}")]
    LengthMismatch { nodes: usize, lists: usize },
    #[error("node id {node} is unknown")]
    UnknownNode { node: usize },
    #[error("prefix step {step} does not continue from the current node")]
    InvalidPrefix { step: usize },
    #[error("graph carries no priorities")]
    MissingPriorities,
    #[error(
        "priority {priority} at node {node} translates to a weight above the cap {cap}"
    )]
    WeightCapExceeded { node: usize, priority: u64, cap: u64 },
}

/// API misuse and runtime failures of template operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("node {node} is not a Player-0 node")]
    NotPlayerZero { node: usize },
    #[error("no active edge at node {node}")]
    NoActiveEdge { node: usize },
    #[error("template is not conflict-free at node {node}")]
    NotConflictFree { node: usize },
    #[error("deleting edges leaves node {node} without successors")]
    DeletionCreatesDeadEnd { node: usize },
    #[error("edge {edge} is not a Player-0 edge")]
    NotPlayerZeroEdge { edge: usize },
    #[error("node {node} lies outside the combined winning region")]
    OutsideWinningRegion { node: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}
