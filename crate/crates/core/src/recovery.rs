//! Escape-edge precomputation. One pass over the tree computes, for every
//! node, the non-tree edge that seeds a detour to the root surviving the
//! failure of that node's parent, together with the detour's total cost.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, NodeId, WeightedGraph};
use crate::heap::PairingHeap;
use crate::spt::{NcaBuckets, ShortestPathTree};

/// A non-tree edge riding up the tree inside a heap. `subtree_end` is the
/// endpoint lying in the subtree the heap currently belongs to. `priority` is
/// dist(u) + cost + dist(v); the exit weight seen from a child c is
/// `priority - dist(c)`, so one constant key orders candidates in every heap
/// the edge ever reaches, and melding never re-keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenCandidate {
    pub edge: EdgeId,
    pub subtree_end: NodeId,
    pub priority: f64,
}

impl Eq for GreenCandidate {}

impl Ord for GreenCandidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| self.edge.cmp(&other.edge))
            .then_with(|| self.subtree_end.cmp(&other.subtree_end))
    }
}

impl PartialOrd for GreenCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub type CandidateHeap = PairingHeap<GreenCandidate>;

/// Endpoint index within a [`RecoveryGraph`]: 0 is the virtual source, 1 + i
/// is the node standing for the i-th child of the failed node.
pub const RX_SOURCE: usize = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub origin: EdgeId,
}

/// The small graph solved per failed node: a virtual source (standing for the
/// world outside the failed subtree, already connected to the destination)
/// plus one node per child of the failed node. Source-to-child edges are the
/// children's best exits; child-to-child edges are the cheapest links between
/// sibling subtrees. No origin edge touches the failed node.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryGraph {
    pub failed: NodeId,
    /// Children of `failed`, in tree order; child `children[i]` is endpoint 1+i.
    pub children: Vec<NodeId>,
    pub edges: Vec<RecoveryEdge>,
}

impl RecoveryGraph {
    pub fn node_count(&self) -> usize {
        self.children.len() + 1
    }
}

/// Per-node escape entry: the seed edge, the full detour cost to the root,
/// and, when the seed edge lands in a sibling subtree, which sibling's entry
/// continues the path.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapeEntry {
    pub escape: EdgeId,
    pub recovery_cost: f64,
    pub next_sibling: Option<NodeId>,
}

/// Escape entries for one destination. Entries exist for every node except
/// the root and the root's own children: a failure of the root leaves no
/// destination to reach, so those detours are undefined and stay absent.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapePlan {
    pub root: NodeId,
    entries: Vec<Option<EscapeEntry>>,
}

impl EscapePlan {
    pub fn new(root: NodeId, entries: Vec<Option<EscapeEntry>>) -> Self {
        Self { root, entries }
    }

    pub fn node_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, v: NodeId) -> Option<&EscapeEntry> {
        self.entries.get(v).and_then(|e| e.as_ref())
    }

    /// One line per non-root node: `v rho_u rho_v cost`, the escape edge's
    /// in-subtree endpoint first, `-` fields when the entry is absent.
    pub fn export(&self, g: &WeightedGraph, t: &ShortestPathTree) -> String {
        let mut out = String::new();
        for v in 0..self.entries.len() {
            if v == self.root {
                continue;
            }
            match self.entry(v) {
                Some(e) => {
                    let edge = g.edge(e.escape);
                    let (p, q) = if t.in_subtree(v, edge.u) {
                        (edge.u, edge.v)
                    } else {
                        (edge.v, edge.u)
                    };
                    let _ = writeln!(out, "{} {} {} {}", v, p, q, e.recovery_cost);
                }
                None => {
                    let _ = writeln!(out, "{} - - -", v);
                }
            }
        }
        out
    }

    /// Inverse of [`export`](Self::export). `next_sibling` is rebuilt from the
    /// tree: an escape edge whose far endpoint stays under the parent of `v`
    /// must continue through the sibling owning that endpoint.
    pub fn import(text: &str, g: &WeightedGraph, t: &ShortestPathTree) -> Result<Self> {
        let n = g.node_count();
        let mut entries: Vec<Option<EscapeEntry>> = vec![None; n];
        let mut seen = vec![false; n];
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(Error::InvalidPlan(format!(
                    "line {}: expected 4 fields, got {}",
                    i + 1,
                    parts.len()
                )));
            }
            let v: NodeId = parts[0]
                .parse()
                .map_err(|_| Error::InvalidPlan(format!("line {}: bad node id", i + 1)))?;
            if v >= n || v == t.root {
                return Err(Error::InvalidPlan(format!(
                    "line {}: node {} is not a non-root node",
                    i + 1,
                    v
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPlan(format!("duplicate entry for node {v}")));
            }
            if parts[1] == "-" {
                continue;
            }
            let p: NodeId = parts[1]
                .parse()
                .map_err(|_| Error::InvalidPlan(format!("line {}: bad endpoint", i + 1)))?;
            let q: NodeId = parts[2]
                .parse()
                .map_err(|_| Error::InvalidPlan(format!("line {}: bad endpoint", i + 1)))?;
            let cost: f64 = parts[3]
                .parse()
                .map_err(|_| Error::InvalidPlan(format!("line {}: bad cost", i + 1)))?;
            let escape = g.find_edge(p, q).ok_or(Error::UnknownEdge { u: p, v: q })?;
            let far = if t.in_subtree(v, p) { q } else { p };
            let next_sibling = match t.parent_node(v) {
                Some(parent) if t.in_subtree(parent, far) => t.child_toward(parent, far),
                _ => None,
            };
            entries[v] = Some(EscapeEntry {
                escape,
                recovery_cost: cost,
                next_sibling,
            });
        }
        Ok(Self {
            root: t.root,
            entries,
        })
    }
}

/// Builds the recovery graph for failed node `x`. `child_heaps` holds the
/// candidate heap of each child of `x` in tree order; invalid tops (far
/// endpoint dying with `x`) are popped for good, which is safe because an
/// endpoint inside the subtree of `x` stays inside the subtree of every
/// ancestor of `x`. `bucket` is the set of non-tree edges whose endpoints
/// meet at `x`.
pub fn build_recovery_graph(
    g: &WeightedGraph,
    t: &ShortestPathTree,
    x: NodeId,
    child_heaps: &mut [CandidateHeap],
    bucket: &[EdgeId],
) -> RecoveryGraph {
    let children = t.children[x].clone();
    let mut edges = Vec::new();
    for (i, h) in child_heaps.iter_mut().enumerate() {
        while let Some(c) = h.peek() {
            let far = g.edge(c.edge).other(c.subtree_end);
            if t.in_subtree(x, far) {
                h.pop();
            } else {
                break;
            }
        }
        if let Some(c) = h.peek() {
            edges.push(RecoveryEdge {
                a: RX_SOURCE,
                b: 1 + i,
                weight: c.priority - t.dist[children[i]],
                origin: c.edge,
            });
        }
    }
    let mut best_blue: BTreeMap<(usize, usize), (f64, EdgeId)> = BTreeMap::new();
    for &eid in bucket {
        let e = g.edge(eid);
        if e.u == x || e.v == x {
            continue; // dies with x
        }
        let cu = t.child_toward(x, e.u).expect("bucketed under x");
        let cv = t.child_toward(x, e.v).expect("bucketed under x");
        let i = children.binary_search(&cu).unwrap();
        let j = children.binary_search(&cv).unwrap();
        debug_assert_ne!(i, j);
        let w = (t.dist[e.u] - t.dist[children[i]]) + e.cost + (t.dist[e.v] - t.dist[children[j]]);
        let cand = (w, eid);
        let cur = best_blue.entry((i.min(j), i.max(j))).or_insert(cand);
        if cand < *cur {
            *cur = cand;
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

// Dijkstra from the virtual source. Ties resolve to the smaller parent index,
// then the smaller edge index, mirroring the tree build. Returns, per node,
// the distance, the parent node index and the index of the parent edge in
// `rx.edges` (usize::MAX when unreached).
fn rx_shortest_paths(rx: &RecoveryGraph) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
    let n = rx.node_count();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in rx.edges.iter().enumerate() {
        adj[e.a].push(i);
        adj[e.b].push(i);
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut par_node = vec![usize::MAX; n];
    let mut par_edge = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap: PairingHeap<(ordered::F64, usize)> = PairingHeap::new();
    dist[RX_SOURCE] = 0.0;
    heap.push((ordered::F64(0.0), RX_SOURCE));
    while let Some((_, node)) = heap.pop() {
        if settled[node] {
            continue;
        }
        settled[node] = true;
        for &i in &adj[node] {
            let e = &rx.edges[i];
            let w = if e.a == node { e.b } else { e.a };
            let nd = dist[node] + e.weight;
            if nd < dist[w] {
                dist[w] = nd;
                par_node[w] = node;
                par_edge[w] = i;
                heap.push((ordered::F64(nd), w));
            } else if nd == dist[w] && (node, i) < (par_node[w], par_edge[w]) {
                par_node[w] = node;
                par_edge[w] = i;
            }
        }
    }
    (dist, par_node, par_edge)
}

mod ordered {
    use std::cmp::Ordering;

    // Total order for finite costs, so the pairing heap can carry them.
    #[derive(Clone, Copy, PartialEq)]
    pub struct F64(pub f64);

    impl Eq for F64 {}

    impl Ord for F64 {
        fn cmp(&self, other: &Self) -> Ordering {
            self.0.total_cmp(&other.0)
        }
    }

    impl PartialOrd for F64 {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
}

/// Escape entries for every node at depth two or more, in one pass. Per
/// failed node the children's heaps seed the recovery graph and afterwards
/// meld into the failed node's own heap; a candidate is pushed once and
/// discarded at most once over the whole run.
///
/// `inspect` sees every recovery graph right before it is solved; pass a
/// no-op closure unless a test wants to look inside.
pub fn compute_escapes_with(
    g: &WeightedGraph,
    t: &ShortestPathTree,
    buckets: &NcaBuckets,
    mut inspect: impl FnMut(&RecoveryGraph),
) -> Result<EscapePlan> {
    let n = g.node_count();
    let mut entries: Vec<Option<EscapeEntry>> = vec![None; n];
    let mut heaps: Vec<CandidateHeap> = (0..n).map(|_| CandidateHeap::new()).collect();
    for (eid, e) in g.edges().iter().enumerate() {
        if t.is_tree_edge(eid) {
            continue;
        }
        let priority = t.dist[e.u] + e.cost + t.dist[e.v];
        heaps[e.u].push(GreenCandidate {
            edge: eid,
            subtree_end: e.u,
            priority,
        });
        heaps[e.v].push(GreenCandidate {
            edge: eid,
            subtree_end: e.v,
            priority,
        });
    }

    // Children before parents: a node finishes only after its whole subtree.
    let mut order: Vec<NodeId> = (0..n).collect();
    order.sort_unstable_by_key(|&v| (t.dfs_fin[v], std::cmp::Reverse(t.dfs_disc[v])));
    for &x in &order {
        if x == t.root || t.children[x].is_empty() {
            continue;
        }
        let mut taken: Vec<CandidateHeap> = t.children[x]
            .iter()
            .map(|&c| std::mem::take(&mut heaps[c]))
            .collect();
        let rx = build_recovery_graph(g, t, x, &mut taken, &buckets.buckets[x]);
        inspect(&rx);
        let (dist, par_node, par_edge) = rx_shortest_paths(&rx);
        for (i, &c) in rx.children.iter().enumerate() {
            let yi = 1 + i;
            if dist[yi].is_infinite() {
                return Err(Error::NoRecovery {
                    failed: x,
                    child: c,
                });
            }
            let next_sibling = if par_node[yi] == RX_SOURCE {
                None
            } else {
                Some(rx.children[par_node[yi] - 1])
            };
            entries[c] = Some(EscapeEntry {
                escape: rx.edges[par_edge[yi]].origin,
                recovery_cost: dist[yi],
                next_sibling,
            });
        }
        let mut hx = std::mem::take(&mut heaps[x]);
        for h in taken {
            hx.meld(h);
        }
        heaps[x] = hx;
    }
    Ok(EscapePlan::new(t.root, entries))
}

/// One-call form of [`compute_escapes_with`].
pub fn compute_escapes(g: &WeightedGraph, t: &ShortestPathTree) -> Result<EscapePlan> {
    let buckets = crate::spt::bucket_by_nca(g, t);
    compute_escapes_with(g, t, &buckets, |_| {})
}

/// The concrete node sequence a message would take from `v` to the root when
/// the parent of `v` is down: descend to the escape edge, cross, and either
/// climb to the root or continue from the sibling that owns the landing
/// point. Rejects plans whose entries do not form such a route.
pub fn reconstruct_path(
    g: &WeightedGraph,
    t: &ShortestPathTree,
    plan: &EscapePlan,
    v: NodeId,
) -> Result<Vec<NodeId>> {
    let failed = t.parent_node(v).ok_or(Error::MissingPlan { node: v })?;
    let max_crossings = t.children[failed].len();
    let mut path = vec![v];
    let mut cur = v;
    let mut crossings = 0;
    loop {
        let ent = plan.entry(cur).ok_or(Error::MissingPlan { node: cur })?;
        let e = g.edge(ent.escape);
        let (p_in, q_out) = if t.in_subtree(cur, e.u) {
            (e.u, e.v)
        } else if t.in_subtree(cur, e.v) {
            (e.v, e.u)
        } else {
            return Err(Error::InvalidPlan(format!(
                "escape edge of node {cur} does not touch its subtree"
            )));
        };
        let mut seg = Vec::new();
        let mut w = p_in;
        while w != cur {
            seg.push(w);
            w = t.parent_node(w).expect("p_in lies under cur");
        }
        path.extend(seg.iter().rev());
        path.push(q_out);
        match ent.next_sibling {
            None => {
                if t.in_subtree(failed, q_out) {
                    return Err(Error::InvalidPlan(format!(
                        "terminal escape of node {cur} stays under the failed node"
                    )));
                }
                // q_out is outside the failed subtree, so its ancestor chain
                // cannot pass through the failed node
                let mut w = q_out;
                while w != t.root {
                    w = t.parent_node(w).expect("non-root nodes have parents");
                    path.push(w);
                }
                return Ok(path);
            }
            Some(sib) => {
                if !t.in_subtree(sib, q_out) {
                    return Err(Error::InvalidPlan(format!(
                        "continuation of node {cur} lands outside sibling {sib}"
                    )));
                }
                let mut w = q_out;
                while w != sib {
                    w = t.parent_node(w).expect("q_out lies under sib");
                    path.push(w);
                }
                crossings += 1;
                if crossings > max_crossings {
                    return Err(Error::InvalidPlan(
                        "sibling chain longer than the child count".into(),
                    ));
                }
                cur = sib;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_biconnected;
    use crate::oracle::{
        naive_recovery_graph, optimal_recovery, recovery_graph_distances, stretch,
    };
    use crate::spt::{bucket_by_nca, build_spt};
    use crate::testgraphs::{g1, G1_A, G1_B, G1_S, G1_X};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_connected_graph(rng: &mut ChaCha12Rng, n: usize) -> WeightedGraph {
        let mut edges = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            seen.insert((u, v));
            edges.push((u, v, rng.gen_range(1..50) as f64));
        }
        for _ in 0..3 * n {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                continue;
            }
            edges.push((u, v, rng.gen_range(1..50) as f64));
        }
        WeightedGraph::new(n, edges).unwrap()
    }

    #[test]
    fn g1_plan_golden() {
        let g = g1();
        let t = build_spt(&g, G1_S).unwrap();
        let plan = compute_escapes(&g, &t).unwrap();
        let ab = g.find_edge(G1_A, G1_B).unwrap();
        let bs = g.find_edge(G1_B, G1_S).unwrap();
        assert_eq!(
            plan.entry(G1_A),
            Some(&EscapeEntry {
                escape: ab,
                recovery_cost: 11.0,
                next_sibling: Some(G1_B),
            })
        );
        assert_eq!(
            plan.entry(G1_B),
            Some(&EscapeEntry {
                escape: bs,
                recovery_cost: 10.0,
                next_sibling: None,
            })
        );
        // the root and its direct children have no detour to plan
        assert_eq!(plan.entry(G1_S), None);
        assert_eq!(plan.entry(G1_X), None);
    }

    #[test]
    fn g1_paths_read_back() {
        let g = g1();
        let t = build_spt(&g, G1_S).unwrap();
        let plan = compute_escapes(&g, &t).unwrap();
        assert_eq!(
            reconstruct_path(&g, &t, &plan, G1_A).unwrap(),
            vec![G1_A, G1_B, G1_S]
        );
        assert_eq!(
            reconstruct_path(&g, &t, &plan, G1_B).unwrap(),
            vec![G1_B, G1_S]
        );
        assert!(matches!(
            reconstruct_path(&g, &t, &plan, G1_X),
            Err(Error::MissingPlan { node: G1_X })
        ));
    }

    #[test]
    fn recovery_graphs_match_the_naive_rebuild() {
        let mut rng = ChaCha12Rng::seed_from_u64(71);
        for n in [6, 9, 14, 23, 40] {
            for _ in 0..12 {
                let g = random_connected_graph(&mut rng, n);
                let t = build_spt(&g, 0).unwrap();
                let buckets = bucket_by_nca(&g, &t);
                let mut fast = Vec::new();
                // plan may legitimately fail on graphs with cut nodes
                let plan = compute_escapes_with(&g, &t, &buckets, |rx| fast.push(rx.clone())).ok();
                for rx in &fast {
                    let naive = naive_recovery_graph(&g, &t, rx.failed);
                    assert_eq!(rx, &naive);
                    let Some(plan) = &plan else { continue };
                    // same child, same detour cost, bit for bit
                    let dist = recovery_graph_distances(rx);
                    for (i, &c) in rx.children.iter().enumerate() {
                        assert_eq!(plan.entry(c).unwrap().recovery_cost, dist[1 + i]);
                    }
                }
            }
        }
    }

    #[test]
    fn plans_are_optimal_locally_and_never_beat_the_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(72);
        let mut checked = 0;
        while checked < 25 {
            let g = random_connected_graph(&mut rng, 18);
            if !is_biconnected(&g).unwrap() {
                continue;
            }
            checked += 1;
            let t = build_spt(&g, 0).unwrap();
            let plan = compute_escapes(&g, &t).unwrap();
            let opt = optimal_recovery(&g, &t, false).unwrap();
            let report = stretch(&plan, &opt).unwrap();
            for row in &report.rows {
                assert!(
                    row.ratio >= 1.0,
                    "detour beat the true optimum at x={} child={}",
                    row.failed,
                    row.child
                );
            }
        }
    }

    #[test]
    fn reconstructed_paths_realize_the_planned_cost() {
        let mut rng = ChaCha12Rng::seed_from_u64(73);
        let mut checked = 0;
        while checked < 25 {
            let g = random_connected_graph(&mut rng, 16);
            if !is_biconnected(&g).unwrap() {
                continue;
            }
            checked += 1;
            let t = build_spt(&g, 0).unwrap();
            let plan = compute_escapes(&g, &t).unwrap();
            for v in 0..g.node_count() {
                let Some(ent) = plan.entry(v) else { continue };
                let failed = t.parent_node(v).unwrap();
                let path = reconstruct_path(&g, &t, &plan, v).unwrap();
                assert_eq!(path.first(), Some(&v));
                assert_eq!(path.last(), Some(&t.root));
                assert!(path.iter().all(|&w| w != failed));
                // integer costs keep every partial sum exact
                let mut total = 0.0;
                for pair in path.windows(2) {
                    let eid = g.find_edge(pair[0], pair[1]).expect("path uses real edges");
                    total += g.edge(eid).cost;
                }
                assert_eq!(total, ent.recovery_cost);
            }
        }
    }

    #[test]
    fn missing_exit_is_an_error() {
        // triangle with a pendant hanging off node 2: when 2 fails its child
        // 3 has nowhere to go
        let g =
            WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (2, 3, 1.0)]).unwrap();
        let t = build_spt(&g, 0).unwrap();
        assert!(matches!(
            compute_escapes(&g, &t),
            Err(Error::NoRecovery {
                failed: 2,
                child: 3
            })
        ));
    }

    #[test]
    fn inspect_sees_every_inner_node_once() {
        let g = g1();
        let t = build_spt(&g, G1_S).unwrap();
        let buckets = bucket_by_nca(&g, &t);
        let mut seen = Vec::new();
        compute_escapes_with(&g, &t, &buckets, |rx| seen.push(rx.failed)).unwrap();
        assert_eq!(seen, vec![G1_X]);
    }

    #[test]
    fn plans_are_deterministic() {
        let mut rng = ChaCha12Rng::seed_from_u64(74);
        for _ in 0..10 {
            let g = random_connected_graph(&mut rng, 20);
            let t = build_spt(&g, 0).unwrap();
            let (Ok(a), Ok(b)) = (compute_escapes(&g, &t), compute_escapes(&g, &t)) else {
                continue;
            };
            assert_eq!(a.export(&g, &t), b.export(&g, &t));
        }
    }

    #[test]
    fn export_import_round_trip() {
        let g = g1();
        let t = build_spt(&g, G1_S).unwrap();
        let plan = compute_escapes(&g, &t).unwrap();
        let text = plan.export(&g, &t);
        let back = EscapePlan::import(&text, &g, &t).unwrap();
        assert_eq!(plan, back);
        // x is a child of the root: explicit absent line
        assert!(text.lines().any(|l| l == format!("{G1_X} - - -")));
    }

    #[test]
    fn import_rejects_garbage() {
        let g = g1();
        let t = build_spt(&g, G1_S).unwrap();
        assert!(EscapePlan::import("2 3 1", &g, &t).is_err()); // 3 fields
        assert!(EscapePlan::import("0 3 1 11", &g, &t).is_err()); // root entry
        assert!(EscapePlan::import("2 2 0 5", &g, &t).is_err()); // no such edge
        assert!(EscapePlan::import("2 3 1 11\n2 3 1 11", &g, &t).is_err()); // duplicate
    }
}
