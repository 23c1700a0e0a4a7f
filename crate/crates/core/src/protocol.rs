//! The forwarding side: what a single node does with a message, knowing only
//! its own tree neighborhood, its escape entry, and whether its parent is
//! answering. Also the byte format messages travel in.

use std::sync::Arc;

use crate::graph::{NodeId, WeightedGraph};
use crate::recovery::EscapePlan;
use crate::spt::ShortestPathTree;

/// Preorder interval labels, shared read-only by every node of one network.
#[derive(Debug)]
pub struct TreeLabels {
    pub disc: Vec<u32>,
    pub fin: Vec<u32>,
}

impl TreeLabels {
    pub fn node_count(&self) -> usize {
        self.disc.len()
    }

    pub fn in_subtree(&self, ancestor: NodeId, v: NodeId) -> bool {
        self.disc[ancestor] <= self.disc[v] && self.disc[v] <= self.fin[ancestor]
    }
}

/// An in-flight message. `escape` is the detour header: when set, the message
/// is steered to node `p` of the pair, pushed across the escape edge, and the
/// header comes off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub dest: NodeId,
    pub escape: Option<(NodeId, NodeId)>,
    pub hop_count: u16,
    pub payload: Vec<u8>,
}

impl Message {
    pub fn new(dest: NodeId, payload: Vec<u8>) -> Self {
        Self {
            dest,
            escape: None,
            hop_count: 0,
            payload,
        }
    }
}

/// Everything one node knows. No global routing table: the escape pair and
/// the interval labels are the entire failover state.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    /// Children sorted by preorder label, for binary-search descent.
    pub children: Vec<NodeId>,
    /// Escape edge oriented (own-subtree endpoint, far endpoint).
    pub rho: Option<(NodeId, NodeId)>,
    pub labels: Arc<TreeLabels>,
}

impl NodeState {
    // The child whose interval holds v, if any.
    fn child_toward(&self, v: NodeId) -> Option<NodeId> {
        let l = &self.labels;
        let i = self.children.partition_point(|&c| l.disc[c] <= l.disc[v]);
        let c = *self.children.get(i.checked_sub(1)?)?;
        l.in_subtree(c, v).then_some(c)
    }
}

/// Per-node routing state for a whole network, from one plan.
pub fn node_states(g: &WeightedGraph, t: &ShortestPathTree, plan: &EscapePlan) -> Vec<NodeState> {
    let labels = Arc::new(TreeLabels {
        disc: t.dfs_disc.clone(),
        fin: t.dfs_fin.clone(),
    });
    (0..g.node_count())
        .map(|v| {
            let rho = plan.entry(v).map(|ent| {
                let e = g.edge(ent.escape);
                if t.in_subtree(v, e.u) {
                    (e.u, e.v)
                } else {
                    (e.v, e.u)
                }
            });
            NodeState {
                id: v,
                parent: t.parent_node(v),
                children: t.children[v].clone(),
                rho,
                labels: Arc::clone(&labels),
            }
        })
        .collect()
}

/// What a node can observe about a neighbor: answering or not. The simulator
/// supplies the ground truth; a closure works fine in tests.
pub trait LivenessView {
    fn is_up(&self, node: NodeId) -> bool;
}

impl<F: Fn(NodeId) -> bool> LivenessView for F {
    fn is_up(&self, node: NodeId) -> bool {
        self(node)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// Parent gone and no escape entry: the plan has no way out from here.
    NoRecovery,
    /// Hop budget exhausted; only a corrupt plan can cause this.
    Ttl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Deliver(Message),
    Send { next: NodeId, msg: Message },
    Drop(DropReason),
}

/// Hop budget: generous enough for any legitimate detour (a plan route
/// crosses each subtree boundary at most once), small enough to cut off a
/// routing loop quickly.
pub fn ttl(node_count: usize) -> u16 {
    (4 * node_count).min(u16::MAX as usize) as u16
}

fn send(next: NodeId, mut msg: Message, budget: u16) -> Decision {
    msg.hop_count += 1;
    if msg.hop_count > budget {
        return Decision::Drop(DropReason::Ttl);
    }
    Decision::Send { next, msg }
}

/// One forwarding step at one node. In order: deliver if this is the
/// destination; with a detour header, either cross the escape edge here or
/// steer down toward its near endpoint; otherwise climb to the parent, and if
/// the parent is not answering, stamp this node's own escape pair on the
/// message first.
pub fn forward(state: &NodeState, mut msg: Message, liveness: &impl LivenessView) -> Decision {
    let budget = ttl(state.labels.node_count());
    if state.id == msg.dest {
        return Decision::Deliver(msg);
    }
    if let Some((p, q)) = msg.escape {
        if state.id == p {
            msg.escape = None;
            return send(q, msg, budget);
        }
        let next = state.child_toward(p).or(state.parent);
        return match next {
            Some(w) => send(w, msg, budget),
            None => Decision::Drop(DropReason::NoRecovery),
        };
    }
    match state.parent {
        Some(parent) if liveness.is_up(parent) => send(parent, msg, budget),
        _ => match state.rho {
            Some((p, q)) if state.id == p => send(q, msg, budget),
            Some((p, q)) => {
                msg.escape = Some((p, q));
                match state.child_toward(p) {
                    Some(c) => send(c, msg, budget),
                    None => Decision::Drop(DropReason::NoRecovery),
                }
            }
            None => Decision::Drop(DropReason::NoRecovery),
        },
    }
}

pub mod wire {
    //! Byte encoding: `5E` magic, destination u32, hop count u16, escape flag
    //! u8, the escape pair as two u32 when flagged, payload length u16, then
    //! the payload. All integers little-endian.

    use super::Message;

    pub const MAGIC: u8 = 0x5E;

    #[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
    pub enum WireError {
        #[error("need {needed} bytes, got {got}")]
        Truncated { needed: usize, got: usize },
        #[error("bad magic byte 0x{found:02X}")]
        BadMagic { found: u8 },
        #[error("escape flag must be 0 or 1, got {found}")]
        BadFlag { found: u8 },
        #[error("payload longer than a u16 length field allows")]
        PayloadTooLong,
        #[error("node id does not fit in u32")]
        NodeIdTooLarge,
        #[error("{0} bytes after the payload")]
        TrailingBytes(usize),
    }

    fn node_id(v: usize) -> Result<u32, WireError> {
        u32::try_from(v).map_err(|_| WireError::NodeIdTooLarge)
    }

    pub fn encode(msg: &Message) -> Result<Vec<u8>, WireError> {
        let len = u16::try_from(msg.payload.len()).map_err(|_| WireError::PayloadTooLong)?;
        let mut out = Vec::with_capacity(18 + msg.payload.len());
        out.push(MAGIC);
        out.extend_from_slice(&node_id(msg.dest)?.to_le_bytes());
        out.extend_from_slice(&msg.hop_count.to_le_bytes());
        match msg.escape {
            None => out.push(0),
            Some((p, q)) => {
                out.push(1);
                out.extend_from_slice(&node_id(p)?.to_le_bytes());
                out.extend_from_slice(&node_id(q)?.to_le_bytes());
            }
        }
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&msg.payload);
        Ok(out)
    }

    struct Reader<'a> {
        bytes: &'a [u8],
        at: usize,
    }

    impl<'a> Reader<'a> {
        fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
            let end = self.at + n;
            if end > self.bytes.len() {
                return Err(WireError::Truncated {
                    needed: end,
                    got: self.bytes.len(),
                });
            }
            let s = &self.bytes[self.at..end];
            self.at = end;
            Ok(s)
        }

        fn u8(&mut self) -> Result<u8, WireError> {
            Ok(self.take(1)?[0])
        }

        fn u16(&mut self) -> Result<u16, WireError> {
            Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
        }

        fn u32(&mut self) -> Result<u32, WireError> {
            Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
        }
    }

    /// Strict inverse of [`encode`]: every byte must be accounted for.
    pub fn decode(bytes: &[u8]) -> Result<Message, WireError> {
        let mut r = Reader { bytes, at: 0 };
        let magic = r.u8()?;
        if magic != MAGIC {
            return Err(WireError::BadMagic { found: magic });
        }
        let dest = r.u32()? as usize;
        let hop_count = r.u16()?;
        let escape = match r.u8()? {
            0 => None,
            1 => {
                let p = r.u32()? as usize;
                let q = r.u32()? as usize;
                Some((p, q))
            }
            found => return Err(WireError::BadFlag { found }),
        };
        let len = r.u16()? as usize;
        let payload = r.take(len)?.to_vec();
        if r.at != bytes.len() {
            return Err(WireError::TrailingBytes(bytes.len() - r.at));
        }
        Ok(Message {
            dest,
            escape,
            hop_count,
            payload,
        })
    }
}
