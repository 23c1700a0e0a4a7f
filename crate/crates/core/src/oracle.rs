//! Brute-force baselines. Everything here recomputes from scratch: subtree
//! membership by walking parent pointers, distances by a plain Dijkstra per
//! failed node. Deliberately shares no classification or search code with
//! the fast path in [`crate::recovery`], so agreement between the two is
//! evidence rather than tautology.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};
use crate::recovery::{EscapePlan, RecoveryEdge, RecoveryGraph, RX_SOURCE};
use crate::spt::ShortestPathTree;

#[derive(Debug, Clone)]
pub struct ChildRecovery {
    pub child: NodeId,
    pub opt_cost: f64,
    pub opt_path: Option<Vec<NodeId>>,
}

/// Optimal recovery distances by recomputation: for each failed node, the
/// true shortest distance from each of its children to the root in the graph
/// without that node and its edges.
#[derive(Debug, Clone)]
pub struct OptimalRecovery {
    pub root: NodeId,
    /// Indexed by failed node; empty for the root and for leaves.
    pub per_failed: Vec<Vec<ChildRecovery>>,
}

#[derive(Clone, Copy, PartialEq)]
struct QueueItem {
    cost: f64,
    node: NodeId,
}

impl Eq for QueueItem {}

impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Dijkstra from `from` skipping `avoid` and every edge incident to it.
fn distances_avoiding(
    g: &WeightedGraph,
    from: NodeId,
    avoid: Option<NodeId>,
) -> (Vec<f64>, Vec<Option<NodeId>>) {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Vec<Option<NodeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[from] = 0.0;
    heap.push(QueueItem {
        cost: 0.0,
        node: from,
    });
    while let Some(QueueItem { node, .. }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for &eid in g.adjacency(node) {
            let e = g.edge(eid);
            let w = e.other(node);
            if Some(w) == avoid || Some(node) == avoid {
                continue;
            }
            let nd = dist[node] + e.cost;
            if nd < dist[w] {
                dist[w] = nd;
                prev[w] = Some(node);
                heap.push(QueueItem { cost: nd, node: w });
            }
        }
    }
    (dist, prev)
}

/// Recomputation baseline: one Dijkstra per failed node. `record_paths` keeps
/// the explicit node sequences (memory grows with n per child, so off by
/// default).
pub fn optimal_recovery(
    g: &WeightedGraph,
    t: &ShortestPathTree,
    record_paths: bool,
) -> Result<OptimalRecovery> {
    let n = g.node_count();
    let mut per_failed = vec![Vec::new(); n];
    for (x, slot) in per_failed.iter_mut().enumerate() {
        if x == t.root || t.children[x].is_empty() {
            continue;
        }
        let (dist, prev) = distances_avoiding(g, t.root, Some(x));
        let mut records = Vec::with_capacity(t.children[x].len());
        for &c in &t.children[x] {
            if dist[c].is_infinite() {
                return Err(Error::NoRecovery {
                    failed: x,
                    child: c,
                });
            }
            let opt_path = record_paths.then(|| {
                // prev points toward the root; walking it from c yields the
                // child-to-root direction directly
                let mut path = vec![c];
                let mut v = c;
                while let Some(p) = prev[v] {
                    path.push(p);
                    v = p;
                }
                path
            });
            records.push(ChildRecovery {
                child: c,
                opt_cost: dist[c],
                opt_path,
            });
        }
        *slot = records;
    }
    Ok(OptimalRecovery {
        root: t.root,
        per_failed,
    })
}

// True iff `anc` is an ancestor of `v` (or v itself), by parent walk.
fn under(t: &ShortestPathTree, anc: NodeId, v: NodeId) -> bool {
    let mut cur = v;
    loop {
        if cur == anc {
            return true;
        }
        match t.parent_node(cur) {
            Some(p) => cur = p,
            None => return false,
        }
    }
}

// The child of `x` whose subtree holds `v`, by parent walk; None when v is x
// itself or outside x's subtree.
fn child_slot(t: &ShortestPathTree, x: NodeId, v: NodeId) -> Option<usize> {
    if v == x {
        return None;
    }
    let mut cur = v;
    loop {
        let p = t.parent_node(cur)?;
        if p == x {
            return t.children[x].binary_search(&cur).ok();
        }
        cur = p;
    }
}

/// Rebuilds the per-failure recovery graph from first principles: scan every
/// non-tree edge, classify it against the failed node by parent walks, keep
/// the cheapest edge per slot. Same weight formulas and tie rules as the fast
/// builder, none of its code.
pub fn naive_recovery_graph(g: &WeightedGraph, t: &ShortestPathTree, x: NodeId) -> RecoveryGraph {
    let children = t.children[x].clone();
    let k = children.len();
    // (weight, origin) per green slot / per unordered sibling pair
    let mut best_green: Vec<Option<(f64, usize)>> = vec![None; k];
    let mut best_blue: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for (eid, e) in g.edges().iter().enumerate() {
        if t.is_tree_edge(eid) || e.u == x || e.v == x {
            continue;
        }
        let su = child_slot(t, x, e.u);
        let sv = child_slot(t, x, e.v);
        match (su, sv) {
            (Some(i), Some(j)) if i != j => {
                let w = (t.dist[e.u] - t.dist[children[i]])
                    + e.cost
                    + (t.dist[e.v] - t.dist[children[j]]);
                let cand = (w, eid);
                let key = (i.min(j), i.max(j));
                let cur = best_blue.entry(key).or_insert(cand);
                if cand < *cur {
                    *cur = cand;
                }
            }
            (Some(_), Some(_)) => {} // both under one child: useless here
            (Some(i), None) if !under(t, x, e.v) => {
                let w = t.dist[e.u] + e.cost + t.dist[e.v] - t.dist[children[i]];
                let cand = (w, eid);
                if best_green[i].is_none_or(|cur| cand < cur) {
                    best_green[i] = Some(cand);
                }
            }
            (None, Some(j)) if !under(t, x, e.u) => {
                let w = t.dist[e.u] + e.cost + t.dist[e.v] - t.dist[children[j]];
                let cand = (w, eid);
                if best_green[j].is_none_or(|cur| cand < cur) {
                    best_green[j] = Some(cand);
                }
            }
            _ => {}
        }
    }
    let mut edges = Vec::new();
    for (i, slot) in best_green.iter().enumerate() {
        if let Some((weight, origin)) = *slot {
            edges.push(RecoveryEdge {
                a: RX_SOURCE,
                b: 1 + i,
                weight,
                origin,
            });
        }
    }
    for (&(i, j), &(weight, origin)) in &best_blue {
        edges.push(RecoveryEdge {
            a: 1 + i,
            b: 1 + j,
            weight,
            origin,
        });
    }
    RecoveryGraph {
        failed: x,
        children,
        edges,
    }
}

/// Textbook Dijkstra from the virtual source of a recovery graph.
pub fn recovery_graph_distances(rx: &RecoveryGraph) -> Vec<f64> {
    let n = rx.node_count();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in rx.edges.iter().enumerate() {
        adj[e.a].push(i);
        adj[e.b].push(i);
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[RX_SOURCE] = 0.0;
    heap.push(QueueItem {
        cost: 0.0,
        node: RX_SOURCE,
    });
    while let Some(QueueItem { node, .. }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for &i in &adj[node] {
            let e = &rx.edges[i];
            let w = if e.a == node { e.b } else { e.a };
            let nd = dist[node] + e.weight;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(QueueItem { cost: nd, node: w });
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchRow {
    pub failed: NodeId,
    pub child: NodeId,
    pub opt_cost: f64,
    pub alg_cost: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct StretchReport {
    pub rows: Vec<StretchRow>,
    pub mean: f64,
    pub max: f64,
}

impl StretchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,child,opt_cost,alg_cost,stretch\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.failed, r.child, r.opt_cost, r.alg_cost, r.ratio
            );
        }
        out
    }
}

/// Ratio of the planned detour cost to the optimal for every (failed node,
/// child) pair, plus the mean and max over all pairs. Pairs are ordered by
/// (failed, child). Mean and max are 0 when there are no pairs at all.
pub fn stretch(plan: &EscapePlan, opt: &OptimalRecovery) -> Result<StretchReport> {
    let mut rows = Vec::new();
    for (x, records) in opt.per_failed.iter().enumerate() {
        for r in records {
            let entry = plan
                .entry(r.child)
                .ok_or(Error::MissingPlan { node: r.child })?;
            rows.push(StretchRow {
                failed: x,
                child: r.child,
                opt_cost: r.opt_cost,
                alg_cost: entry.recovery_cost,
                ratio: entry.recovery_cost / r.opt_cost,
            });
        }
    }
    let mean = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.ratio).sum::<f64>() / rows.len() as f64
    };
    let max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(StretchReport { rows, max, mean })
}
