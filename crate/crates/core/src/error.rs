use crate::graph::NodeId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("self-loop at node {node}")]
    SelfLoop { node: NodeId },
    #[error("duplicate edge {{{u},{v}}}")]
    DuplicateEdge { u: NodeId, v: NodeId },
    #[error("edge {{{u},{v}}} has negative or non-finite cost {cost}")]
    InvalidCost { u: NodeId, v: NodeId, cost: f64 },
    #[error("node id {node} out of range for {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("graph has {n} nodes, need at least {min}")]
    TooFewNodes { n: usize, min: usize },
    #[error("node {node} is unreachable from node {root}")]
    Unreachable { node: NodeId, root: NodeId },
    #[error(
        "no recovery path for child {child} when node {failed} fails (graph is not biconnected)"
    )]
    NoRecovery { failed: NodeId, child: NodeId },
    #[error("graph is not biconnected")]
    NotBiconnected,
    #[error("no escape plan entry for node {node}")]
    MissingPlan { node: NodeId },
    #[error("escape plan references edge {{{u},{v}}} absent from the graph")]
    UnknownEdge { u: NodeId, v: NodeId },
    #[error("escape plan is inconsistent: {0}")]
    InvalidPlan(String),
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("target edge count {m} exceeds the {max} possible on {n} nodes")]
    DegreeInfeasible { n: usize, m: usize, max: usize },
    #[error("invalid failure schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid injection #{idx}: {msg}")]
    InvalidInjection { idx: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
