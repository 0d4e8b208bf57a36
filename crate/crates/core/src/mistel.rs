//! Mixed strategy templates for games with a quantitative objective (energy
//! or mean-payoff) conjoined with a qualitative one (co-Büchi plus
//! accumulated safety).
//!
//! The synthesis loop alternates qualitative and quantitative template
//! synthesis and removes conflicts from their joint winning region: whenever
//! some node's entire minimal-activation edge set is unsafe or co-live, those
//! edges are pinned to infinite activation in the next value-iteration
//! initialization and the joint region is added as a safety restriction.
//! Termination is bounded by `|V| + |E0| + 1` rounds since each round shrinks
//! the winning region or permanently pins Player-0 edges. Hot-starting makes
//! the loop cheap: value iteration never repeats a lift across rounds.

use crate::error::TemplateError;
use crate::fixpoint::{fixpoint, winning_region_fixed_credit, winning_region_unknown_credit,
    EdgeValues, FixpointStats};
use crate::game::{EdgeId, GameGraph, NodeId, NodeSet, Player};
use crate::pestel::{co_buechi_template_within, safety_region, BoundedPestel};
use crate::qastel::{PositionalStrategy, Qastel};
use crate::value::Value;

/// Qualitative objective: a co-Büchi stay region plus the safety restriction
/// accumulated over conflict-resolution rounds. `allowed` only ever shrinks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QualObjective {
    pub stay: NodeSet,
    pub allowed: NodeSet,
}

impl QualObjective {
    pub fn co_buechi(g: &GameGraph, stay: NodeSet) -> QualObjective {
        QualObjective {
            stay,
            allowed: g.full_node_set(),
        }
    }
}

/// Mixed template: bounded qualitative template, quantitative template, and
/// their joint winning region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mistel {
    pub pestel: BoundedPestel,
    pub qastel: Qastel,
    pub winning: NodeSet,
}

impl Mistel {
    /// Conflict-freeness: no winning Player-0 node has its entire
    /// minimal-activation edge set constrained.
    pub fn is_conflict_free(&self, g: &GameGraph) -> bool {
        self.winning.iter_ones().all(|u| {
            let u = NodeId(u as u32);
            g.owner(u) != Player::Zero
                || self
                    .qastel
                    .min_edges(g, u)
                    .expect("owner checked")
                    .iter()
                    .any(|&e| !self.pestel.constrains(e))
        })
    }

    /// Serialization: the quantitative CSV block, the qualitative CSV block,
    /// and a winning-region line.
    pub fn serialize(&self, g: &GameGraph) -> String {
        let ids: Vec<String> = self
            .winning
            .iter_ones()
            .map(|u| u.to_string())
            .collect();
        format!(
            "{}\n{}\nwinning: {}\n",
            self.qastel.to_csv(g).trim_end(),
            self.pestel.to_csv().trim_end(),
            ids.join(" ")
        )
    }
}

/// Result of one synthesis run, carrying everything needed to hot-start a
/// later incremental run.
#[derive(Clone, Debug)]
pub struct MistelState {
    pub phi: QualObjective,
    /// Fixed initial credit for the quantitative side; `None` solves the
    /// unknown-credit / mean-payoff variant.
    pub credit: Option<u64>,
    /// Final edge values, including the pinned conflict edges.
    pub act: EdgeValues,
    pub mistel: Mistel,
    pub rounds: usize,
    pub stats: FixpointStats,
}

/// One round of conflict detection: synthesize both templates, intersect the
/// regions, and collect every fully-constrained minimal edge set.
///
/// Conflicts are scanned over the qualitative region intersected with the
/// unknown-credit quantitative region, not just the returned joint region:
/// with a fixed initial credit, plays from the winning region may visit
/// nodes outside it carrying surplus credit, and extraction is sound only if
/// those nodes were cleared of conflicts too. For the unknown-credit and
/// mean-payoff objectives the two regions coincide.
pub fn find_conflicts(
    g: &GameGraph,
    phi: &QualObjective,
    credit: Option<u64>,
    act: EdgeValues,
) -> (NodeSet, Vec<EdgeId>, Mistel, EdgeValues, FixpointStats) {
    let allowed_region = safety_region(g, &phi.allowed, &g.full_node_set());
    let (w_qual, pestel) = co_buechi_template_within(g, &phi.stay, &allowed_region);

    let (fix, stats) = fixpoint(g, act);
    let alive = winning_region_unknown_credit(g, &fix);
    let w_quant = match credit {
        Some(c) => winning_region_fixed_credit(g, &fix, c),
        None => alive.clone(),
    };
    let qastel = Qastel::from_edge_values(g, &fix);

    let winning = w_qual.clone() & w_quant;
    let scan = w_qual & alive;
    let mut conflicts = Vec::new();
    for u in scan.iter_ones() {
        let u = NodeId(u as u32);
        if g.owner(u) != Player::Zero {
            continue;
        }
        let min_edges = qastel.min_edges(g, u).expect("owner checked");
        if min_edges.iter().all(|&e| pestel.constrains(e)) {
            conflicts.extend(min_edges);
        }
    }
    let mistel = Mistel {
        pestel,
        qastel,
        winning: winning.clone(),
    };
    (winning, conflicts, mistel, fix, stats)
}

/// Full synthesis loop from explicit initial data; see [`compute_mistel`]
/// for the cold-start entry point and [`incremental_mistel`] for hot starts.
pub fn compute_mistel_from(
    g: &GameGraph,
    mut phi: QualObjective,
    credit: Option<u64>,
    initial: EdgeValues,
) -> MistelState {
    let round_cap = g.node_count() + g.player0_edge_count() + 1;
    let mut act = initial;
    let mut rounds = 0usize;
    let mut total = FixpointStats::default();
    let mut prev_winning: Option<NodeSet> = None;
    loop {
        rounds += 1;
        assert!(
            rounds <= round_cap,
            "conflict loop exceeded {round_cap} rounds"
        );
        let (winning, conflicts, mistel, fix, stats) = find_conflicts(g, &phi, credit, act);
        total.accumulate(&stats);
        if let Some(prev) = &prev_winning {
            debug_assert!(
                winning.iter_ones().all(|u| prev[u]),
                "winning region grew across rounds"
            );
        }
        prev_winning = Some(winning.clone());
        act = fix;
        if conflicts.is_empty() {
            return MistelState {
                phi,
                credit,
                act,
                mistel,
                rounds,
                stats: total,
            };
        }
        phi.allowed &= winning;
        for e in conflicts {
            act.set(e, Value::INFINITY);
        }
    }
}

/// Synthesizes a conflict-free winning mixed template for the conjunction of
/// the quantitative objective (mean-payoff / unknown-credit energy, or
/// fixed-credit energy when `credit` is given) with co-Büchi over `stay`.
pub fn compute_mistel(g: &GameGraph, stay: NodeSet, credit: Option<u64>) -> MistelState {
    compute_mistel_from(g, QualObjective::co_buechi(g, stay), credit, EdgeValues::zero(g))
}

/// Re-synthesis after a new co-Büchi objective arrives: conjoins `new_stay`
/// with the prior stay region, hot-starts value iteration from the prior
/// activation function, and keeps the prior safety restriction.
pub fn incremental_mistel(
    g: &GameGraph,
    prior: &MistelState,
    new_stay: &[NodeId],
    credit: Option<u64>,
) -> Result<MistelState, TemplateError> {
    let mut stay_set = g.empty_node_set();
    for &u in new_stay {
        if u.index() >= g.node_count() {
            return Err(TemplateError::Graph(crate::error::GraphError::UnknownNode {
                node: u.index(),
            }));
        }
        stay_set.set(u.index(), true);
    }
    let phi = QualObjective {
        stay: prior.phi.stay.clone() & stay_set,
        allowed: prior.phi.allowed.clone(),
    };
    Ok(compute_mistel_from(g, phi, credit, prior.act.clone()))
}

/// Extracts a positional strategy from a conflict-free mixed template: per
/// Player-0 node the minimal-activation edge among the unconstrained ones,
/// ties broken by lowest edge id.
///
/// Errors when a winning node has no unconstrained edge. Outside the winning
/// region an unconstrained node still gets its minimal unconstrained edge and
/// a fully-constrained node falls back to the minimal edge overall, so the
/// strategy is total.
pub fn extract_mixed_strategy(
    g: &GameGraph,
    m: &Mistel,
) -> Result<PositionalStrategy, TemplateError> {
    let mut strat = PositionalStrategy::empty(g);
    for u in g.nodes() {
        if g.owner(u) != Player::Zero {
            continue;
        }
        let pick = g
            .out_edges(u)
            .filter(|&e| !m.pestel.constrains(e))
            .min_by_key(|&e| (m.qastel.activation(e), e));
        match pick {
            Some(e) => strat.set(u, e),
            None if m.winning[u.index()] => {
                return Err(TemplateError::NotConflictFree { node: u.index() })
            }
            None => {
                let fallback = g
                    .out_edges(u)
                    .min_by_key(|&e| (m.qastel.activation(e), e))
                    .expect("graphs have no dead ends");
                strat.set(u, fallback);
            }
        }
    }
    Ok(strat)
}
