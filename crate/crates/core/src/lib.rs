//! Single-failure recovery routing for weighted undirected graphs.
//!
//! Given a destination node, every message normally climbs the shortest-path
//! tree toward it. This crate precomputes, for each node, one escape edge and
//! the cost of the detour it opens, so that when a node's parent dies the
//! message can still reach the destination without waiting for the network to
//! reconverge. The escape tables are small (one edge per node), fast to
//! compute, and come with a simulator that replays failures tick by tick to
//! check the guarantees hold on the wire.

pub mod bench;
pub mod error;
pub mod generator;
pub mod graph;
pub mod heap;
pub mod oracle;
pub mod protocol;
pub mod recovery;
pub mod simnet;
pub mod spt;

pub use error::{Error, Result};
pub use graph::{load_graph, save_graph, Edge, EdgeId, NodeId, WeightedGraph};
pub use recovery::{compute_escapes, EscapeEntry, EscapePlan};
pub use spt::{build_spt, ShortestPathTree};
