//! Shortest-path trees toward a destination, DFS interval labels for O(1)
//! subtree tests, and bucketing of non-tree edges by nearest common ancestor.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, NodeId, WeightedGraph};

/// Tree of shortest paths from every node to `root`, with preorder interval
/// labels. `u` lies in the subtree of `x` iff
/// `dfs_disc[x] <= dfs_disc[u] <= dfs_fin[x]`.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    pub root: NodeId,
    /// Edge toward the root, absent only for the root itself.
    pub parent: Vec<Option<EdgeId>>,
    pub dist: Vec<f64>,
    /// Sorted by node id; the DFS that assigns labels visits them in this order.
    pub children: Vec<Vec<NodeId>>,
    pub dfs_disc: Vec<u32>,
    pub dfs_fin: Vec<u32>,
    parent_node: Vec<Option<NodeId>>,
    tree_edge: Vec<bool>,
}

impl ShortestPathTree {
    pub fn node_count(&self) -> usize {
        self.dist.len()
    }

    pub fn parent_node(&self, v: NodeId) -> Option<NodeId> {
        self.parent_node[v]
    }

    pub fn is_tree_edge(&self, e: EdgeId) -> bool {
        self.tree_edge[e]
    }

    pub fn in_subtree(&self, ancestor: NodeId, v: NodeId) -> bool {
        self.dfs_disc[ancestor] <= self.dfs_disc[v] && self.dfs_disc[v] <= self.dfs_fin[ancestor]
    }

    /// The child of `x` whose subtree contains `v`, or None when `v` is not a
    /// proper descendant of `x`. Children are sorted by id, hence by disc, so
    /// a binary search suffices.
    pub fn child_toward(&self, x: NodeId, v: NodeId) -> Option<NodeId> {
        if v == x || !self.in_subtree(x, v) {
            return None;
        }
        let kids = &self.children[x];
        let i = kids.partition_point(|&c| self.dfs_disc[c] <= self.dfs_disc[v]);
        let c = kids[i.checked_sub(1)?];
        self.in_subtree(c, v).then_some(c)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct State {
    cost: f64,
    node: NodeId,
}

impl Eq for State {}

// Reversed so BinaryHeap pops the smallest cost first.
impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `s` over the whole graph. Ties between equal-distance parents
/// resolve to the smaller parent node id, then the smaller edge id, so the
/// resulting tree is a pure function of the graph.
pub fn build_spt(g: &WeightedGraph, s: NodeId) -> Result<ShortestPathTree> {
    let n = g.node_count();
    if s >= n {
        return Err(Error::NodeOutOfRange { node: s, n });
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<EdgeId>> = vec![None; n];
    let mut parent_node: Vec<Option<NodeId>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(State { cost: 0.0, node: s });
    while let Some(State { cost, node }) = heap.pop() {
        if settled[node] {
            continue;
        }
        settled[node] = true;
        for &eid in g.adjacency(node) {
            let e = g.edge(eid);
            let w = e.other(node);
            let nd = cost + e.cost;
            if nd < dist[w] {
                dist[w] = nd;
                parent[w] = Some(eid);
                parent_node[w] = Some(node);
                heap.push(State { cost: nd, node: w });
            } else if nd == dist[w] && w != s {
                if let (Some(pn), Some(pe)) = (parent_node[w], parent[w]) {
                    if (node, eid) < (pn, pe) {
                        parent[w] = Some(eid);
                        parent_node[w] = Some(node);
                    }
                }
            }
        }
    }
    if let Some(v) = (0..n).find(|&v| dist[v].is_infinite()) {
        return Err(Error::Unreachable { node: v, root: s });
    }

    let mut children = vec![Vec::new(); n];
    for (v, p) in parent_node.iter().enumerate() {
        if let Some(p) = *p {
            children[p].push(v); // v ascends, so each list ends up sorted
        }
    }

    let mut dfs_disc = vec![0u32; n];
    let mut dfs_fin = vec![0u32; n];
    let mut timer = 1u32;
    dfs_disc[s] = 0;
    let mut stack: Vec<(NodeId, usize)> = vec![(s, 0)];
    while let Some(top) = stack.len().checked_sub(1) {
        let (x, i) = stack[top];
        if i < children[x].len() {
            stack[top].1 += 1;
            let c = children[x][i];
            dfs_disc[c] = timer;
            timer += 1;
            stack.push((c, 0));
        } else {
            dfs_fin[x] = timer - 1; // largest disc in x's subtree
            stack.pop();
        }
    }

    let mut tree_edge = vec![false; g.edge_count()];
    for e in parent.iter().flatten() {
        tree_edge[*e] = true;
    }

    Ok(ShortestPathTree {
        root: s,
        parent,
        dist,
        children,
        dfs_disc,
        dfs_fin,
        parent_node,
        tree_edge,
    })
}

/// Non-tree edges grouped by the nearest common ancestor of their endpoints.
#[derive(Debug, Clone)]
pub struct NcaBuckets {
    pub buckets: Vec<Vec<EdgeId>>,
}

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Offline NCA over all non-tree edges in one DFS (union-find with path
/// compression). Each non-tree edge lands in exactly one bucket.
pub fn bucket_by_nca(g: &WeightedGraph, t: &ShortestPathTree) -> NcaBuckets {
    let n = g.node_count();
    let mut queries: Vec<Vec<(NodeId, EdgeId)>> = vec![Vec::new(); n];
    for (eid, e) in g.edges().iter().enumerate() {
        if t.is_tree_edge(eid) {
            continue;
        }
        queries[e.u].push((e.v, eid));
        queries[e.v].push((e.u, eid));
    }

    let mut dsu = DisjointSet::new(n);
    let mut anchor: Vec<NodeId> = (0..n).collect();
    let mut finished = vec![false; n];
    let mut buckets = vec![Vec::new(); n];
    let mut stack: Vec<(NodeId, usize)> = vec![(t.root, 0)];
    while let Some(top) = stack.len().checked_sub(1) {
        let (x, i) = stack[top];
        if i < t.children[x].len() {
            stack[top].1 += 1;
            stack.push((t.children[x][i], 0));
        } else {
            stack.pop();
            finished[x] = true;
            // The edge is resolved at its later-finishing endpoint; the other
            // endpoint's set is by then anchored at the NCA.
            for &(other, eid) in &queries[x] {
                if finished[other] {
                    let w = anchor[dsu.find(other)];
                    buckets[w].push(eid);
                }
            }
            if let Some(p) = t.parent_node(x) {
                dsu.union(p, x);
                let r = dsu.find(p);
                anchor[r] = p;
            }
        }
    }
    NcaBuckets { buckets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testgraphs::{g1, G1_A, G1_B, G1_S, G1_X};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    // Reference Dijkstra: distances only, no tie rules, linear scan extraction.
    fn textbook_distances(g: &WeightedGraph, s: NodeId) -> Vec<f64> {
        let n = g.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[s] = 0.0;
        for _ in 0..n {
            let mut best = None;
            for v in 0..n {
                if !done[v] && dist[v].is_finite() && best.is_none_or(|b: usize| dist[v] < dist[b])
                {
                    best = Some(v);
                }
            }
            let Some(u) = best else { break };
            done[u] = true;
            for &e in g.adjacency(u) {
                let w = g.edge(e).other(u);
                let nd = dist[u] + g.edge(e).cost;
                if nd < dist[w] {
                    dist[w] = nd;
                }
            }
        }
        dist
    }

    fn random_connected_graph(rng: &mut ChaCha12Rng, n: usize) -> WeightedGraph {
        let mut edges = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            seen.insert((u, v));
            edges.push((u, v, rng.gen_range(1..50) as f64));
        }
        for _ in 0..2 * n {
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
    fn g1_tree_shape() {
        let g = g1();
        let t = build_spt(&g, G1_S).unwrap();
        assert_eq!(t.dist, vec![0.0, 1.0, 2.0, 2.0]);
        assert_eq!(t.parent_node(G1_X), Some(G1_S));
        assert_eq!(t.parent_node(G1_A), Some(G1_X));
        assert_eq!(t.parent_node(G1_B), Some(G1_X));
        assert_eq!(t.children[G1_S], vec![G1_X]);
        assert_eq!(t.children[G1_X], vec![G1_A, G1_B]);
        assert!(t.parent[G1_S].is_none());
    }

    #[test]
    fn g1_subtree_tests() {
        let t = build_spt(&g1(), G1_S).unwrap();
        assert!(t.in_subtree(G1_X, G1_A));
        assert!(!t.in_subtree(G1_A, G1_B));
        assert!(t.in_subtree(G1_S, G1_B));
        assert!(t.in_subtree(G1_A, G1_A));
        assert_eq!(t.child_toward(G1_X, G1_B), Some(G1_B));
        assert_eq!(t.child_toward(G1_S, G1_A), Some(G1_X));
        assert_eq!(t.child_toward(G1_X, G1_X), None);
        assert_eq!(t.child_toward(G1_A, G1_B), None);
    }

    #[test]
    fn single_edge() {
        let g = WeightedGraph::new(2, [(0, 1, 5.0)]).unwrap();
        let t = build_spt(&g, 0).unwrap();
        assert_eq!(t.dist[1], 5.0);
        assert_eq!(t.parent[1], Some(0));
    }

    #[test]
    fn disconnected_is_an_error() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            build_spt(&g, 0),
            Err(Error::Unreachable { node: 2, root: 0 })
        ));
    }

    #[test]
    fn tie_break_prefers_smaller_parent() {
        // 3 is reachable at distance 2 via node 1 or node 2.
        let g =
            WeightedGraph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap();
        let t = build_spt(&g, 0).unwrap();
        assert_eq!(t.parent_node(3), Some(1));
        let t2 = build_spt(&g, 0).unwrap();
        assert_eq!(t.parent, t2.parent);
    }

    #[test]
    fn distances_match_textbook_dijkstra() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..120 {
            let n = rng.gen_range(2..40);
            let g = random_connected_graph(&mut rng, n);
            let s = rng.gen_range(0..n);
            let t = build_spt(&g, s).unwrap();
            assert_eq!(t.dist, textbook_distances(&g, s));
        }
    }

    #[test]
    fn parent_distance_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..60 {
            let n = rng.gen_range(2..40);
            let g = random_connected_graph(&mut rng, n);
            let t = build_spt(&g, 0).unwrap();
            for v in 1..n {
                let e = g.edge(t.parent[v].unwrap());
                let p = t.parent_node(v).unwrap();
                assert_eq!(t.dist[v], t.dist[p] + e.cost);
            }
        }
    }

    #[test]
    fn dfs_intervals_nest_or_are_disjoint() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..60 {
            let n = rng.gen_range(2..40);
            let g = random_connected_graph(&mut rng, n);
            let t = build_spt(&g, 0).unwrap();
            for u in 0..n {
                for v in 0..n {
                    let (a, b) = ((t.dfs_disc[u], t.dfs_fin[u]), (t.dfs_disc[v], t.dfs_fin[v]));
                    let disjoint = a.1 < b.0 || b.1 < a.0;
                    let nested = (a.0 <= b.0 && b.1 <= a.1) || (b.0 <= a.0 && a.1 <= b.1);
                    assert!(disjoint || nested, "u={u} v={v} a={a:?} b={b:?}");
                }
            }
        }
    }

    fn naive_nca(t: &ShortestPathTree, mut p: NodeId, q: NodeId) -> NodeId {
        let mut ancestors = std::collections::HashSet::new();
        loop {
            ancestors.insert(p);
            match t.parent_node(p) {
                Some(next) => p = next,
                None => break,
            }
        }
        let mut v = q;
        loop {
            if ancestors.contains(&v) {
                return v;
            }
            v = t.parent_node(v).unwrap();
        }
    }

    #[test]
    fn g1_buckets() {
        let g = g1();
        let t = build_spt(&g, G1_S).unwrap();
        let b = bucket_by_nca(&g, &t);
        let ab = g.find_edge(G1_A, G1_B).unwrap();
        let bs = g.find_edge(G1_B, G1_S).unwrap();
        assert_eq!(b.buckets[G1_X], vec![ab]);
        assert_eq!(b.buckets[G1_S], vec![bs]);
        assert!(b.buckets[G1_A].is_empty() && b.buckets[G1_B].is_empty());
    }

    #[test]
    fn tree_has_empty_buckets() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)]).unwrap();
        let t = build_spt(&g, 0).unwrap();
        let b = bucket_by_nca(&g, &t);
        assert!(b.buckets.iter().all(|v| v.is_empty()));
    }

    #[test]
    fn grandchild_edge_lands_at_the_ancestor() {
        // 0-1-2 chain plus a (0,2) shortcut that is too expensive to be a tree edge
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 9.0)]).unwrap();
        let t = build_spt(&g, 0).unwrap();
        let b = bucket_by_nca(&g, &t);
        assert_eq!(b.buckets[0], vec![2]);
    }

    #[test]
    fn buckets_match_naive_ancestor_walk() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for _ in 0..80 {
            let n = rng.gen_range(3..64);
            let g = random_connected_graph(&mut rng, n);
            let t = build_spt(&g, rng.gen_range(0..n)).unwrap();
            let b = bucket_by_nca(&g, &t);
            let mut expected = vec![Vec::new(); n];
            for (eid, e) in g.edges().iter().enumerate() {
                if t.is_tree_edge(eid) {
                    continue;
                }
                expected[naive_nca(&t, e.u, e.v)].push(eid);
            }
            for (v, want) in expected.iter_mut().enumerate() {
                let mut got = b.buckets[v].clone();
                got.sort_unstable();
                want.sort_unstable();
                assert_eq!(got, *want, "bucket of {v}");
            }
        }
    }
}
