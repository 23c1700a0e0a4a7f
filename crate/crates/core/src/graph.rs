//! Undirected weighted graphs with an adjacency index and text file I/O.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub cost: f64,
}

impl Edge {
    /// The endpoint that is not `end`. `end` must be one of the two endpoints.
    pub fn other(&self, end: NodeId) -> NodeId {
        if end == self.u {
            self.v
        } else {
            self.u
        }
    }

    fn key(&self) -> (NodeId, NodeId) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

/// Simple undirected graph: no self-loops, no duplicate {u,v} pairs, costs ≥ 0.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<EdgeId>>,
}

impl WeightedGraph {
    pub fn new(
        node_count: usize,
        edge_list: impl IntoIterator<Item = (NodeId, NodeId, f64)>,
    ) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::TooFewNodes { n: 0, min: 1 });
        }
        let mut edges = Vec::new();
        let mut adjacency = vec![Vec::new(); node_count];
        let mut seen = HashSet::new();
        for (u, v, cost) in edge_list {
            for node in [u, v] {
                if node >= node_count {
                    return Err(Error::NodeOutOfRange {
                        node,
                        n: node_count,
                    });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { node: u });
            }
            if !(cost.is_finite() && cost >= 0.0) {
                return Err(Error::InvalidCost { u, v, cost });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge { u, v });
            }
            let id = edges.len();
            edges.push(Edge { u, v, cost });
            adjacency[u].push(id);
            adjacency[v].push(id);
        }
        Ok(Self {
            node_count,
            edges,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Ids of the edges incident to `v`.
    pub fn adjacency(&self, v: NodeId) -> &[EdgeId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.adjacency
            .get(u)?
            .iter()
            .copied()
            .find(|&e| self.edges[e].other(u) == v)
    }
}

/// Equality is structural: same node count and the same {u,v,cost} edge set,
/// regardless of edge order.
impl PartialEq for WeightedGraph {
    fn eq(&self, other: &Self) -> bool {
        if self.node_count != other.node_count || self.edges.len() != other.edges.len() {
            return false;
        }
        let sorted = |g: &WeightedGraph| {
            let mut v: Vec<(NodeId, NodeId, f64)> = g
                .edges
                .iter()
                .map(|e| (e.key().0, e.key().1, e.cost))
                .collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        sorted(self) == sorted(other)
    }
}

fn fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_field<T: std::str::FromStr>(
    line: usize,
    field: Option<&(usize, &str)>,
    what: &str,
) -> Result<T> {
    let (column, tok) = field.ok_or_else(|| Error::Parse {
        line,
        column: 1,
        msg: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        column: *column,
        msg: format!("cannot parse {what} from {tok:?}"),
    })
}

/// Parse the text graph format: a `n m s` header line, then `m` lines `u v w`.
/// Lines starting with `#` and blank lines are skipped. Returns the graph and
/// the destination node id `s` from the header.
pub fn load_graph(text: &str) -> Result<(WeightedGraph, NodeId)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('#')
        });

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        column: 1,
        msg: "empty input".into(),
    })?;
    let hf = fields(header);
    let n: usize = parse_field(hline, hf.first(), "node count")?;
    let m: usize = parse_field(hline, hf.get(1), "edge count")?;
    let s: usize = parse_field(hline, hf.get(2), "destination node")?;
    if let Some((column, tok)) = hf.get(3) {
        return Err(Error::Parse {
            line: hline,
            column: *column,
            msg: format!("unexpected trailing field {tok:?}"),
        });
    }
    if n == 0 {
        return Err(Error::TooFewNodes { n: 0, min: 1 });
    }
    if s >= n {
        return Err(Error::NodeOutOfRange { node: s, n });
    }

    let mut edge_list = Vec::with_capacity(m);
    let mut last_line = hline;
    for _ in 0..m {
        let (lno, line) = lines.next().ok_or(Error::Parse {
            line: last_line + 1,
            column: 1,
            msg: format!("expected {m} edge lines, found {}", edge_list.len()),
        })?;
        last_line = lno;
        let f = fields(line);
        let u: usize = parse_field(lno, f.first(), "edge endpoint u")?;
        let v: usize = parse_field(lno, f.get(1), "edge endpoint v")?;
        let w: f64 = parse_field(lno, f.get(2), "edge cost")?;
        if let Some((column, tok)) = f.get(3) {
            return Err(Error::Parse {
                line: lno,
                column: *column,
                msg: format!("unexpected trailing field {tok:?}"),
            });
        }
        if !w.is_finite() {
            return Err(Error::Parse {
                line: lno,
                column: f[2].0,
                msg: format!("edge cost {w} is not finite"),
            });
        }
        edge_list.push((u, v, w));
    }
    if let Some((lno, line)) = lines.next() {
        return Err(Error::Parse {
            line: lno,
            column: fields(line).first().map_or(1, |f| f.0),
            msg: "unexpected line after last edge".into(),
        });
    }
    Ok((WeightedGraph::new(n, edge_list)?, s))
}

/// Canonical text form: edges sorted by (min endpoint, max endpoint), smaller
/// endpoint printed first. `load_graph` of the output yields an equal graph.
pub fn save_graph(g: &WeightedGraph, dest: NodeId) -> String {
    let mut order: Vec<&Edge> = g.edges.iter().collect();
    order.sort_by_key(|e| e.key());
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", g.node_count, g.edges.len(), dest);
    for e in order {
        let (a, b) = e.key();
        let _ = writeln!(out, "{} {} {}", a, b, e.cost);
    }
    out
}

/// True iff `g` is connected and has no articulation point (lowpoint DFS).
pub fn is_biconnected(g: &WeightedGraph) -> Result<bool> {
    let n = g.node_count();
    if n < 3 {
        return Err(Error::TooFewNodes { n, min: 3 });
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    // (node, edge we arrived by, next adjacency index)
    let mut stack: Vec<(NodeId, Option<EdgeId>, usize)> = vec![(0, None, 0)];
    disc[0] = 0;
    low[0] = 0;
    let mut timer = 1usize;
    let mut root_children = 0usize;
    while let Some(top) = stack.len().checked_sub(1) {
        let (u, entry, idx) = stack[top];
        if idx < g.adjacency(u).len() {
            stack[top].2 += 1;
            let eid = g.adjacency(u)[idx];
            if Some(eid) == entry {
                continue;
            }
            let w = g.edge(eid).other(u);
            if disc[w] == usize::MAX {
                disc[w] = timer;
                low[w] = timer;
                timer += 1;
                if u == 0 {
                    root_children += 1;
                }
                stack.push((w, Some(eid), 0));
            } else {
                low[u] = low[u].min(disc[w]);
            }
        } else {
            stack.pop();
            if let Some(&(p, _, _)) = stack.last() {
                low[p] = low[p].min(low[u]);
                if p != 0 && low[u] >= disc[p] {
                    return Ok(false); // p is an articulation point
                }
            }
        }
    }
    if timer < n {
        return Ok(false); // disconnected
    }
    Ok(root_children < 2)
}
