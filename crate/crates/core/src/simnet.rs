//! Tick-driven replay of the protocol over a failure schedule. Each tick:
//! liveness flips per the schedule, messages sitting inside a dead node are
//! lost, then every message takes one forwarding step in id order, and
//! finally new injections are placed (their first step runs next tick). A
//! hop landing on the destination counts as delivered on that tick.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedGraph};
use crate::protocol::{forward, node_states, Decision, DropReason, Message};
use crate::recovery::EscapePlan;
use crate::spt::ShortestPathTree;

/// One node out of service over the half-open tick range `[down_from, up_at)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FailureEvent {
    pub node: NodeId,
    pub down_from: u64,
    pub up_at: u64,
}

/// At most one node down at any tick, never the root.
#[derive(Debug, Clone, Default)]
pub struct FailureSchedule {
    events: Vec<FailureEvent>,
}

impl FailureSchedule {
    pub fn new(events: Vec<FailureEvent>, root: NodeId, node_count: usize) -> Result<Self> {
        for e in &events {
            if e.node >= node_count {
                return Err(Error::InvalidSchedule(format!(
                    "node {} out of range",
                    e.node
                )));
            }
            if e.node == root {
                return Err(Error::InvalidSchedule(
                    "the destination itself cannot fail".into(),
                ));
            }
            if e.down_from >= e.up_at {
                return Err(Error::InvalidSchedule(format!(
                    "empty outage [{}, {}) for node {}",
                    e.down_from, e.up_at, e.node
                )));
            }
        }
        let mut sorted = events.clone();
        sorted.sort_by_key(|e| e.down_from);
        for pair in sorted.windows(2) {
            if pair[1].down_from < pair[0].up_at {
                return Err(Error::InvalidSchedule(format!(
                    "outages of nodes {} and {} overlap",
                    pair[0].node, pair[1].node
                )));
            }
        }
        Ok(Self { events })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[FailureEvent] {
        &self.events
    }

    pub fn is_down(&self, node: NodeId, tick: u64) -> bool {
        self.events
            .iter()
            .any(|e| e.node == node && e.down_from <= tick && tick < e.up_at)
    }

    /// One `node down_tick up_tick` line per outage.
    pub fn format(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{} {} {}", e.node, e.down_from, e.up_at);
        }
        out
    }

    pub fn parse(text: &str, root: NodeId, node_count: usize) -> Result<Self> {
        let mut events = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let mut next = |what: &str| {
                fields.next().ok_or_else(|| {
                    Error::InvalidSchedule(format!("line {}: missing {what}", i + 1))
                })
            };
            let node = next("node")?
                .parse()
                .map_err(|_| Error::InvalidSchedule(format!("line {}: bad node", i + 1)))?;
            let down_from = next("down tick")?
                .parse()
                .map_err(|_| Error::InvalidSchedule(format!("line {}: bad down tick", i + 1)))?;
            let up_at = next("up tick")?
                .parse()
                .map_err(|_| Error::InvalidSchedule(format!("line {}: bad up tick", i + 1)))?;
            if fields.next().is_some() {
                return Err(Error::InvalidSchedule(format!(
                    "line {}: trailing fields",
                    i + 1
                )));
            }
            events.push(FailureEvent {
                node,
                down_from,
                up_at,
            });
        }
        Self::new(events, root, node_count)
    }
}

/// A message handed to the network: starts at `origin` on `tick`, first
/// forwarding step on the next tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Injection {
    pub origin: NodeId,
    pub tick: u64,
}

/// One traversed edge. `escape` is the detour header as it left `from`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hop {
    pub tick: u64,
    pub from: NodeId,
    pub to: NodeId,
    pub escape: Option<(NodeId, NodeId)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropCause {
    NoRecovery,
    Ttl,
    /// The message sat inside a node when that node went down.
    LostAtFailedNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Delivered { tick: u64 },
    Dropped { tick: u64, cause: DropCause },
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub msg_id: usize,
    pub origin: NodeId,
    pub inject_tick: u64,
    pub hops: Vec<Hop>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn delivered(&self) -> bool {
        matches!(self.outcome, Outcome::Delivered { .. })
    }

    /// Sum of traversed edge costs; None if some hop is not a real edge.
    pub fn realized_cost(&self, g: &WeightedGraph) -> Option<f64> {
        let mut total = 0.0;
        for h in &self.hops {
            total += g.edge(g.find_edge(h.from, h.to)?).cost;
        }
        Some(total)
    }
}

struct Live {
    msg_id: usize,
    at: NodeId,
    msg: Message,
}

/// Replays `injections` against the schedule and returns one trace per
/// injection, in injection order. Injecting at a node that is down (or out of
/// range) is refused up front.
pub fn run(
    g: &WeightedGraph,
    t: &ShortestPathTree,
    plan: &EscapePlan,
    schedule: &FailureSchedule,
    injections: &[Injection],
) -> Result<Vec<Trace>> {
    let n = g.node_count();
    for (idx, inj) in injections.iter().enumerate() {
        if inj.origin >= n {
            return Err(Error::InvalidInjection {
                idx,
                msg: format!("origin {} out of range", inj.origin),
            });
        }
        if schedule.is_down(inj.origin, inj.tick) {
            return Err(Error::InvalidInjection {
                idx,
                msg: format!("origin {} is down at tick {}", inj.origin, inj.tick),
            });
        }
    }

    let states = node_states(g, t, plan);
    let mut traces: Vec<Trace> = injections
        .iter()
        .enumerate()
        .map(|(msg_id, inj)| Trace {
            msg_id,
            origin: inj.origin,
            inject_tick: inj.tick,
            hops: Vec::new(),
            outcome: Outcome::Dropped {
                tick: inj.tick,
                cause: DropCause::LostAtFailedNode,
            }, // overwritten before the run ends
        })
        .collect();

    let mut pending: Vec<(usize, &Injection)> = injections.iter().enumerate().collect();
    pending.sort_by_key(|&(id, inj)| (inj.tick, id));
    let mut pending = pending.into_iter().peekable();
    let mut live: Vec<Live> = Vec::new();
    let mut tick: u64 = 0;

    while !live.is_empty() || pending.peek().is_some() {
        // lost inside a failed node
        live.retain_mut(|m| {
            if schedule.is_down(m.at, tick) {
                traces[m.msg_id].outcome = Outcome::Dropped {
                    tick,
                    cause: DropCause::LostAtFailedNode,
                };
                false
            } else {
                true
            }
        });

        // one step each, in message order
        let mut still = Vec::with_capacity(live.len());
        for mut m in live {
            let up = |v: NodeId| !schedule.is_down(v, tick);
            match forward(&states[m.at], m.msg, &up) {
                Decision::Deliver(_) => {
                    traces[m.msg_id].outcome = Outcome::Delivered { tick };
                }
                Decision::Send { next, msg } => {
                    traces[m.msg_id].hops.push(Hop {
                        tick,
                        from: m.at,
                        to: next,
                        escape: msg.escape,
                    });
                    if next == msg.dest {
                        traces[m.msg_id].outcome = Outcome::Delivered { tick };
                    } else {
                        m.at = next;
                        m.msg = msg;
                        still.push(m);
                    }
                }
                Decision::Drop(reason) => {
                    traces[m.msg_id].outcome = Outcome::Dropped {
                        tick,
                        cause: match reason {
                            DropReason::NoRecovery => DropCause::NoRecovery,
                            DropReason::Ttl => DropCause::Ttl,
                        },
                    };
                }
            }
        }
        live = still;

        // place this tick's injections; they move next tick
        while pending.peek().is_some_and(|&(_, inj)| inj.tick == tick) {
            let (msg_id, inj) = pending.next().unwrap();
            live.push(Live {
                msg_id,
                at: inj.origin,
                msg: Message::new(t.root, Vec::new()),
            });
        }
        live.sort_by_key(|m| m.msg_id);
        tick += 1;
    }
    Ok(traces)
}

/// One `msg_id,tick,from,to,flag,p,q` line per hop, headed.
pub fn trace_log(traces: &[Trace]) -> String {
    let mut out = String::from("msg_id,tick,from,to,flag,p,q\n");
    for tr in traces {
        for h in &tr.hops {
            match h.escape {
                Some((p, q)) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},1,{},{}",
                        tr.msg_id, h.tick, h.from, h.to, p, q
                    );
                }
                None => {
                    let _ = writeln!(out, "{},{},{},{},0,-,-", tr.msg_id, h.tick, h.from, h.to);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub failures: Vec<String>,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{}: {}",
                c.name,
                if c.pass() { "ok" } else { "violated" }
            );
            for f in &c.failures {
                let _ = writeln!(out, "  {f}");
            }
        }
        out
    }

    /// Verdict per check as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,result,violations\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{}",
                c.name,
                if c.pass() { "pass" } else { "fail" },
                c.failures.len()
            );
        }
        out
    }
}

// Persistent from the message's point of view: down the whole way from its
// injection to its resolution.
fn down_throughout(schedule: &FailureSchedule, node: NodeId, from: u64, to: u64) -> bool {
    (from..=to).all(|tick| schedule.is_down(node, tick))
}

fn outcome_tick(tr: &Trace) -> u64 {
    match tr.outcome {
        Outcome::Delivered { tick } => tick,
        Outcome::Dropped { tick, .. } => tick,
    }
}

/// Replays every trace against the guarantees the plan is supposed to give:
/// everything arrives, never through a down node, no (node, header) state
/// revisited, hop counts within budget, hops over real edges only, detour
/// costs exactly as planned under a persistent failure, and pure parent-chain
/// climbs when nothing failed.
pub fn verify(
    g: &WeightedGraph,
    t: &ShortestPathTree,
    plan: &EscapePlan,
    schedule: &FailureSchedule,
    traces: &[Trace],
) -> Report {
    let mut delivery = Vec::new();
    let mut avoidance = Vec::new();
    let mut loops = Vec::new();
    let mut hop_bound = Vec::new();
    let mut real_edges = Vec::new();
    let mut detour_cost = Vec::new();
    let mut baseline = Vec::new();
    let budget = crate::protocol::ttl(g.node_count());

    for tr in traces {
        if !tr.delivered() {
            delivery.push(format!("message {}: {:?}", tr.msg_id, tr.outcome));
        }
        for h in &tr.hops {
            if schedule.is_down(h.from, h.tick) || schedule.is_down(h.to, h.tick) {
                avoidance.push(format!(
                    "message {}: hop {}->{} at tick {} touches a down node",
                    tr.msg_id, h.from, h.to, h.tick
                ));
            }
        }
        let mut seen = std::collections::HashSet::new();
        seen.insert((tr.origin, None));
        for h in &tr.hops {
            if !seen.insert((h.to, h.escape)) {
                loops.push(format!(
                    "message {}: node {} revisited with the same header",
                    tr.msg_id, h.to
                ));
            }
        }
        if tr.hops.len() > usize::from(budget) {
            hop_bound.push(format!(
                "message {}: {} hops exceed the budget of {}",
                tr.msg_id,
                tr.hops.len(),
                budget
            ));
        }
        let realized = tr.realized_cost(g);
        if realized.is_none() {
            real_edges.push(format!(
                "message {}: some hop does not follow an edge",
                tr.msg_id
            ));
        }

        let deviation = tr.hops.iter().find(|h| t.parent_node(h.from) != Some(h.to));
        match deviation {
            Some(first) if tr.delivered() => {
                let detector = first.from;
                if let Some(failed) = t.parent_node(detector) {
                    if down_throughout(schedule, failed, tr.inject_tick, outcome_tick(tr)) {
                        let planned = plan.entry(detector).map(|e| e.recovery_cost);
                        let expected = planned.map(|c| (t.dist[tr.origin] - t.dist[detector]) + c);
                        if realized != expected {
                            detour_cost.push(format!(
                                "message {}: realized {:?}, planned prefix+detour {:?}",
                                tr.msg_id, realized, expected
                            ));
                        }
                    }
                }
            }
            None if tr.delivered() => {
                if tr.hops.iter().any(|h| h.escape.is_some()) {
                    baseline.push(format!(
                        "message {}: detour header set without leaving the tree",
                        tr.msg_id
                    ));
                }
                if realized != Some(t.dist[tr.origin]) {
                    baseline.push(format!(
                        "message {}: tree climb cost {:?} differs from distance {}",
                        tr.msg_id, realized, t.dist[tr.origin]
                    ));
                }
            }
            _ => {}
        }
    }

    Report {
        checks: vec![
            Check {
                name: "delivery",
                failures: delivery,
            },
            Check {
                name: "down node avoidance",
                failures: avoidance,
            },
            Check {
                name: "loop freedom",
                failures: loops,
            },
            Check {
                name: "hop bound",
                failures: hop_bound,
            },
            Check {
                name: "real edges only",
                failures: real_edges,
            },
            Check {
                name: "detour cost equality",
                failures: detour_cost,
            },
            Check {
                name: "failure-free baseline",
                failures: baseline,
            },
        ],
    }
}
