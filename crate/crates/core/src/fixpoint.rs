//! Edge- and node-based value iteration for energy and mean-payoff games.
//!
//! The edge operator maps an edge `e = (u, v)` to the aggregate of
//! `μ(e') ⊖ w(e)` over the successor edges `e'` of `v`, minimizing when `v`
//! belongs to Player 0 and maximizing when it belongs to Player 1. Finite
//! values are saturated to infinity above `|V| * W`. The least fixpoint above
//! the zero function is the edge-optimal value function: the minimal credit
//! needed to take the edge and still win the energy game from its source.
//!
//! [`fixpoint`] runs a FIFO worklist that only ever lifts values, so it can be
//! hot-started from any prior fixpoint (after edge deletions or with selected
//! edges pinned to infinity) and will never repeat work already done.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use crate::game::{EdgeId, GameGraph, NodeId, NodeSet, Player};
use crate::value::Value;

/// A value per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeValues(pub Vec<Value>);

impl NodeValues {
    pub fn zero(g: &GameGraph) -> NodeValues {
        NodeValues(vec![Value::ZERO; g.node_count()])
    }

    pub fn get(&self, u: NodeId) -> Value {
        self.0[u.index()]
    }

    pub fn set(&mut self, u: NodeId, v: Value) {
        self.0[u.index()] = v;
    }
}

/// A value per global edge id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeValues(pub Vec<Value>);

impl EdgeValues {
    pub fn zero(g: &GameGraph) -> EdgeValues {
        EdgeValues(vec![Value::ZERO; g.edge_count()])
    }

    pub fn get(&self, e: EdgeId) -> Value {
        self.0[e.index()]
    }

    pub fn set(&mut self, e: EdgeId, v: Value) {
        self.0[e.index()] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == Value::ZERO)
    }

    /// Pointwise `<=`.
    pub fn le(&self, other: &EdgeValues) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

/// Counters shared by all template-synthesis entry points.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FixpointStats {
    /// Number of strict value increases.
    pub lifts: u64,
    /// Number of edge evaluations (worklist pops).
    pub evaluations: u64,
    pub wall: Duration,
    pub hot_started: bool,
}

impl FixpointStats {
    pub fn accumulate(&mut self, other: &FixpointStats) {
        self.lifts += other.lifts;
        self.evaluations += other.evaluations;
        self.wall += other.wall;
        self.hot_started = self.hot_started || other.hot_started;
    }
}

/// One synchronous application of the node operator.
pub fn apply_node_operator(g: &GameGraph, mu: &NodeValues) -> NodeValues {
    let cap = g.value_cap();
    let mut out = Vec::with_capacity(g.node_count());
    for u in g.nodes() {
        let mut agg: Option<Value> = None;
        for e in g.out_edges(u) {
            let val = mu.get(g.target(e)).minus_weight(g.weight(e), cap);
            agg = Some(match (agg, g.owner(u)) {
                (None, _) => val,
                (Some(a), Player::Zero) => a.min(val),
                (Some(a), Player::One) => a.max(val),
            });
        }
        out.push(agg.expect("graphs have no dead ends"));
    }
    NodeValues(out)
}

/// Aggregate of `μ(e')` over the successor edges of `v`: min for Player-0
/// targets, max for Player-1 targets.
fn successor_aggregate(g: &GameGraph, mu: &EdgeValues, v: NodeId) -> Value {
    let mut agg: Option<Value> = None;
    for e in g.out_edges(v) {
        let val = mu.get(e);
        agg = Some(match (agg, g.owner(v)) {
            (None, _) => val,
            (Some(a), Player::Zero) => a.min(val),
            (Some(a), Player::One) => a.max(val),
        });
    }
    agg.expect("graphs have no dead ends")
}

/// One synchronous application of the edge operator.
pub fn apply_edge_operator(g: &GameGraph, mu: &EdgeValues) -> EdgeValues {
    let cap = g.value_cap();
    let mut out = Vec::with_capacity(g.edge_count());
    for e in g.edges() {
        let v = g.target(e);
        out.push(successor_aggregate(g, mu, v).minus_weight(g.weight(e), cap));
    }
    EdgeValues(out)
}

/// Least fixpoint of the edge operator at or above `initial`, via a FIFO
/// worklist of edges whose value may still increase.
///
/// Values never decrease: an edge initialized to infinity stays pinned there,
/// which is exactly the treatment conflict edges and deleted edges receive.
pub fn fixpoint(g: &GameGraph, initial: EdgeValues) -> (EdgeValues, FixpointStats) {
    assert_eq!(initial.0.len(), g.edge_count());
    let start = Instant::now();
    let hot_started = !initial.is_zero();
    let cap = g.value_cap();
    let mut mu = initial;
    let mut stats = FixpointStats {
        hot_started,
        ..FixpointStats::default()
    };

    let mut queue: VecDeque<u32> = (0..g.edge_count() as u32).collect();
    let mut queued = vec![true; g.edge_count()];

    while let Some(idx) = queue.pop_front() {
        queued[idx as usize] = false;
        let e = EdgeId(idx);
        stats.evaluations += 1;
        let current = mu.get(e);
        if current == Value::INFINITY {
            continue;
        }
        let v = g.target(e);
        let val = successor_aggregate(g, &mu, v).minus_weight(g.weight(e), cap);
        if val > current {
            mu.set(e, val);
            stats.lifts += 1;
            // Edges into the source of `e` read this value through their
            // successor aggregate.
            for d in g.in_edges(g.source(e)) {
                if !queued[d.index()] {
                    queued[d.index()] = true;
                    queue.push_back(d.0);
                }
            }
        }
    }

    debug_assert!(
        stats.lifts <= g.edge_count() as u64 * (cap + 2),
        "lift count exceeds the progress-measure bound"
    );
    stats.wall = start.elapsed();
    (mu, stats)
}

/// Node values induced by edge values: min over outgoing edges at Player-0
/// nodes, max at Player-1 nodes (the node's required credit).
pub fn node_from_edge_values(g: &GameGraph, mu: &EdgeValues) -> NodeValues {
    let mut out = Vec::with_capacity(g.node_count());
    for u in g.nodes() {
        let mut agg: Option<Value> = None;
        for e in g.out_edges(u) {
            let val = mu.get(e);
            agg = Some(match (agg, g.owner(u)) {
                (None, _) => val,
                (Some(a), Player::Zero) => a.min(val),
                (Some(a), Player::One) => a.max(val),
            });
        }
        out.push(agg.expect("graphs have no dead ends"));
    }
    NodeValues(out)
}

/// Winning region for the unknown-initial-credit energy game (equivalently
/// the mean-payoff game): Player-0 nodes with some finite edge value,
/// Player-1 nodes with all edge values finite.
pub fn winning_region_unknown_credit(g: &GameGraph, mu: &EdgeValues) -> NodeSet {
    let mut region = g.empty_node_set();
    for u in g.nodes() {
        let wins = match g.owner(u) {
            Player::Zero => g.out_edges(u).any(|e| mu.get(e).is_finite()),
            Player::One => g.out_edges(u).all(|e| mu.get(e).is_finite()),
        };
        region.set(u.index(), wins);
    }
    region
}

/// Winning region for the energy game with fixed initial credit `c`.
pub fn winning_region_fixed_credit(g: &GameGraph, mu: &EdgeValues, c: u64) -> NodeSet {
    let bound = Value::finite(c);
    let mut region = g.empty_node_set();
    for u in g.nodes() {
        let wins = match g.owner(u) {
            Player::Zero => g.out_edges(u).any(|e| mu.get(e) <= bound),
            Player::One => g.out_edges(u).all(|e| mu.get(e) <= bound),
        };
        region.set(u.index(), wins);
    }
    region
}
