//! Quantitative strategy templates: per-edge activation thresholds.
//!
//! A template activates an edge exactly when the current credit reaches its
//! threshold, so the active set at a node grows monotonically with credit.
//! Extracting activations from the edge-optimal value function yields the
//! optimal template: winning, maximally permissive for energy objectives, and
//! permissive for all finite-memory mean-payoff strategies.

use crate::error::TemplateError;
use crate::fixpoint::{self, EdgeValues, FixpointStats};
use crate::game::{EdgeId, GameGraph, NodeId, NodeSet, PlayPrefix, Player};
use crate::value::Value;

/// Activation thresholds for Player-0 edges. Player-1 entries carry their
/// edge values too (they are never queried as activations), so the template
/// doubles as an exact hot-start initialization for recomputations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qastel {
    activation: Vec<Value>,
}

/// A positional Player-0 strategy: one chosen outgoing edge per Player-0 node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionalStrategy {
    choice: Vec<Option<EdgeId>>,
}

impl PositionalStrategy {
    pub fn empty(g: &GameGraph) -> PositionalStrategy {
        PositionalStrategy {
            choice: vec![None; g.node_count()],
        }
    }

    pub fn set(&mut self, u: NodeId, e: EdgeId) {
        self.choice[u.index()] = Some(e);
    }

    pub fn get(&self, u: NodeId) -> Option<EdgeId> {
        self.choice[u.index()]
    }

    /// The chosen edge of a Player-0 node; panics if none was assigned.
    pub fn edge(&self, u: NodeId) -> EdgeId {
        self.choice[u.index()].expect("strategy undefined at node")
    }
}

/// Compliance verdict for a play prefix against a template.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Compliance {
    /// Every Player-0 step took an active edge.
    Compliant,
    /// The first deviation happened at a node whose active set was empty;
    /// the play may legally continue arbitrarily from there.
    Released { step: usize },
    /// The first deviation skipped available active edges.
    Violating { step: usize },
}

impl Qastel {
    /// Template with the given activation on every edge.
    pub fn uniform(g: &GameGraph, value: Value) -> Qastel {
        Qastel {
            activation: vec![value; g.edge_count()],
        }
    }

    /// Extracts the template from an edge value function: the activation of a
    /// Player-0 edge is its edge value. Optimal when `mu` is the edge-optimal
    /// value function.
    pub fn from_edge_values(_g: &GameGraph, mu: &EdgeValues) -> Qastel {
        Qastel {
            activation: mu.0.clone(),
        }
    }

    pub fn activation(&self, e: EdgeId) -> Value {
        self.activation[e.index()]
    }

    /// The stored edge values, usable as an exact hot-start initialization
    /// for recomputations.
    pub fn as_edge_values(&self) -> EdgeValues {
        EdgeValues(self.activation.clone())
    }

    /// Edges of `u` activated by a (possibly negative) credit. Empty below 0.
    pub fn active_edges_signed(
        &self,
        g: &GameGraph,
        u: NodeId,
        credit: i64,
    ) -> Result<Vec<EdgeId>, TemplateError> {
        if credit < 0 {
            if g.owner(u) != Player::Zero {
                return Err(TemplateError::NotPlayerZero { node: u.index() });
            }
            return Ok(Vec::new());
        }
        self.active_edges(g, u, Value::finite(credit as u64))
    }

    /// Edges of `u` activated by `credit`; with infinite credit, every edge
    /// with a finite activation.
    pub fn active_edges(
        &self,
        g: &GameGraph,
        u: NodeId,
        credit: Value,
    ) -> Result<Vec<EdgeId>, TemplateError> {
        if g.owner(u) != Player::Zero {
            return Err(TemplateError::NotPlayerZero { node: u.index() });
        }
        Ok(g.out_edges(u)
            .filter(|&e| {
                let act = self.activation(e);
                if credit.is_infinite() {
                    act.is_finite()
                } else {
                    act <= credit
                }
            })
            .collect())
    }

    /// The outgoing edges of `v` achieving the minimal activation value.
    pub fn min_edges(&self, g: &GameGraph, v: NodeId) -> Result<Vec<EdgeId>, TemplateError> {
        if g.owner(v) != Player::Zero {
            return Err(TemplateError::NotPlayerZero { node: v.index() });
        }
        let min = g
            .out_edges(v)
            .map(|e| self.activation(e))
            .min()
            .expect("graphs have no dead ends");
        Ok(g.out_edges(v)
            .filter(|&e| self.activation(e) == min)
            .collect())
    }

    /// Per-node activation intervals: for each lower bound (in increasing
    /// order) the set of edges active from that credit on. Edges with
    /// infinite activation never appear.
    pub fn intervals(&self, g: &GameGraph, u: NodeId) -> Vec<(u64, Vec<EdgeId>)> {
        let mut finite: Vec<(u64, EdgeId)> = g
            .out_edges(u)
            .filter_map(|e| self.activation(e).as_finite().map(|v| (v, e)))
            .collect();
        finite.sort();
        let mut out: Vec<(u64, Vec<EdgeId>)> = Vec::new();
        for (act, e) in finite {
            match out.last_mut() {
                Some((lo, set)) if *lo == act => set.push(e),
                _ => {
                    let mut set = out.last().map(|(_, s)| s.clone()).unwrap_or_default();
                    set.push(e);
                    out.push((act, set));
                }
            }
        }
        out
    }

    /// Positional strategy following the template: per node the edge of
    /// minimal activation, ties broken by lowest edge id.
    pub fn extract_strategy(&self, g: &GameGraph) -> PositionalStrategy {
        let mut strat = PositionalStrategy::empty(g);
        for u in g.nodes() {
            if g.owner(u) != Player::Zero {
                continue;
            }
            let best = g
                .out_edges(u)
                .min_by_key(|&e| (self.activation(e), e))
                .expect("graphs have no dead ends");
            strat.set(u, best);
        }
        strat
    }

    /// Checks a play prefix for template compliance with initial credit `c0`.
    pub fn check_compliance(&self, g: &GameGraph, c0: u64, prefix: &PlayPrefix) -> Compliance {
        let weights = prefix.running_weights(g);
        let mut at = prefix.start();
        for (i, &e) in prefix.edges().iter().enumerate() {
            if g.owner(at) == Player::Zero {
                let credit = c0 as i64 + weights[i];
                let active = self
                    .active_edges_signed(g, at, credit)
                    .expect("owner checked above");
                if !active.contains(&e) {
                    return if active.is_empty() {
                        Compliance::Released { step: i }
                    } else {
                        Compliance::Violating { step: i }
                    };
                }
            }
            at = g.target(e);
        }
        Compliance::Compliant
    }

    /// CSV serialization: `edge_id,src,dst,activation` per Player-0 edge,
    /// with `inf` for infinity.
    pub fn to_csv(&self, g: &GameGraph) -> String {
        let mut out = String::from("edge_id,src,dst,activation\n");
        for e in g.player0_edges() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.index(),
                g.source(e).index(),
                g.target(e).index(),
                self.activation(e)
            ));
        }
        out
    }
}

/// Runs the edge-based value iteration from `initial` and returns the winning
/// region (unknown credit, or fixed credit when `credit` is given) together
/// with the extracted template.
pub fn compute_qastel(
    g: &GameGraph,
    initial: EdgeValues,
    credit: Option<u64>,
) -> (NodeSet, Qastel, FixpointStats) {
    let (mu, stats) = fixpoint::fixpoint(g, initial);
    let region = match credit {
        Some(c) => fixpoint::winning_region_fixed_credit(g, &mu, c),
        None => fixpoint::winning_region_unknown_credit(g, &mu),
    };
    (region, Qastel::from_edge_values(g, &mu), stats)
}
