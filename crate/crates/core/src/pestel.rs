//! Bounded qualitative strategy templates: unsafe and co-live edges.
//!
//! A strategy follows a bounded template `(S, D)` if its plays never use an
//! unsafe edge and use every co-live edge at most finitely often. Safety
//! templates mark the Player-0 edges leaving the safety region unsafe. The
//! co-Büchi synthesis peels the game into layers: each layer is the Player-0
//! attractor of the largest region where the play can be kept inside the stay
//! set forever, and every Player-0 edge of a layer that does not enter the
//! layer's safety core is marked co-live. Once a following play has exhausted
//! its co-live budget it can only move into some layer core and stay there,
//! so it eventually remains inside the stay set.

use crate::game::{EdgeId, EdgeSet, GameGraph, NodeId, NodeSet, Player};
use crate::verify::{components, StrategyProduct};

/// Unsafe edges `S` (never use) and co-live edges `D` (use finitely often),
/// both over Player-0 edges, kept disjoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedPestel {
    pub unsafe_edges: EdgeSet,
    pub colive_edges: EdgeSet,
}

impl BoundedPestel {
    pub fn empty(g: &GameGraph) -> BoundedPestel {
        BoundedPestel {
            unsafe_edges: g.empty_edge_set(),
            colive_edges: g.empty_edge_set(),
        }
    }

    pub fn constrains(&self, e: EdgeId) -> bool {
        self.unsafe_edges[e.index()] || self.colive_edges[e.index()]
    }

    /// CSV serialization: `edge_id,kind` with kind `unsafe` or `colive`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("edge_id,kind\n");
        for e in self.unsafe_edges.iter_ones() {
            out.push_str(&format!("{e},unsafe\n"));
        }
        for e in self.colive_edges.iter_ones() {
            out.push_str(&format!("{e},colive\n"));
        }
        out
    }
}

/// A template that still carries live groups, as produced by general
/// parity-template synthesis elsewhere. Only accepted as input to
/// [`bound_pestel`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullPestel {
    pub unsafe_edges: EdgeSet,
    pub colive_edges: EdgeSet,
    pub live_groups: Vec<EdgeSet>,
}

/// Least set `A` with `target ⊆ A ⊆ within` from which `player` can force
/// reaching `target` inside the subgame induced by `within`.
pub fn attractor(g: &GameGraph, player: Player, target: &NodeSet, within: &NodeSet) -> NodeSet {
    debug_assert!(target.iter_ones().all(|u| within[u]));
    let mut attr = target.clone() & within.clone();
    // Opponent nodes fall when all their in-subgame successors are attracted.
    let mut remaining: Vec<usize> = g
        .nodes()
        .map(|u| {
            g.out_edges(u)
                .filter(|&e| within[g.target(e).index()])
                .count()
        })
        .collect();
    let mut queue: Vec<usize> = attr.iter_ones().collect();
    while let Some(u) = queue.pop() {
        for e in g.in_edges(NodeId(u as u32)) {
            let p = g.source(e).index();
            if !within[p] || attr[p] {
                continue;
            }
            let joins = if g.owner(NodeId(p as u32)) == player {
                true
            } else {
                remaining[p] -= 1;
                remaining[p] == 0
            };
            if joins {
                attr.set(p, true);
                queue.push(p);
            }
        }
    }
    attr
}

/// Greatest region `R ⊆ stay ∩ within` closed for Player 0 inside the
/// subgame induced by `within`: Player-0 nodes keep a successor in `R`,
/// Player-1 nodes keep all in-subgame successors in `R`.
pub fn safety_region(g: &GameGraph, stay: &NodeSet, within: &NodeSet) -> NodeSet {
    let mut region = stay.clone() & within.clone();
    // Count per node the successors currently inside the candidate region.
    let mut inside: Vec<usize> = g
        .nodes()
        .map(|u| {
            g.out_edges(u)
                .filter(|&e| region[g.target(e).index()])
                .count()
        })
        .collect();
    let total_within: Vec<usize> = g
        .nodes()
        .map(|u| {
            g.out_edges(u)
                .filter(|&e| within[g.target(e).index()])
                .count()
        })
        .collect();
    let violated = |u: usize, inside: &[usize], total: &[usize]| match g.owner(NodeId(u as u32)) {
        Player::Zero => inside[u] == 0,
        Player::One => inside[u] < total[u],
    };
    let mut queue: Vec<usize> = region
        .iter_ones()
        .filter(|&u| violated(u, &inside, &total_within))
        .collect();
    let mut queued = vec![false; g.node_count()];
    for &u in &queue {
        queued[u] = true;
    }
    while let Some(u) = queue.pop() {
        queued[u] = false;
        if !region[u] || !violated(u, &inside, &total_within) {
            continue;
        }
        region.set(u, false);
        // Removed nodes stay inside `within`, so the Player-1 totals are
        // fixed; only the inside-region counters move.
        for e in g.in_edges(NodeId(u as u32)) {
            let p = g.source(e).index();
            inside[p] -= 1;
            if region[p] && !queued[p] && violated(p, &inside, &total_within) {
                queued[p] = true;
                queue.push(p);
            }
        }
    }
    region
}

/// Safety synthesis: the winning region for "stay inside `stay` forever" and
/// the template marking Player-0 edges that leave the region unsafe.
pub fn safety_template(g: &GameGraph, stay: &NodeSet) -> (NodeSet, BoundedPestel) {
    let region = safety_region(g, stay, &g.full_node_set());
    let mut t = BoundedPestel::empty(g);
    for e in g.player0_edges() {
        if region[g.source(e).index()] && !region[g.target(e).index()] {
            t.unsafe_edges.set(e.index(), true);
        }
    }
    (region, t)
}

/// Co-Büchi synthesis restricted to the subgame induced by `within`: winning
/// region and bounded template for "eventually remain inside `stay`".
pub fn co_buechi_template_within(
    g: &GameGraph,
    stay: &NodeSet,
    within: &NodeSet,
) -> (NodeSet, BoundedPestel) {
    let mut sub = within.clone();
    let mut winning = g.empty_node_set();
    let mut colive = g.empty_edge_set();
    loop {
        let core = safety_region(g, stay, &sub);
        if core.not_any() {
            break;
        }
        let layer = attractor(g, Player::Zero, &core, &sub);
        for u in layer.iter_ones() {
            let u = NodeId(u as u32);
            if g.owner(u) != Player::Zero {
                continue;
            }
            for e in g.out_edges(u) {
                if !core[g.target(e).index()] {
                    colive.set(e.index(), true);
                }
            }
        }
        winning |= layer.clone();
        sub &= !layer;
    }
    let mut unsafe_edges = g.empty_edge_set();
    for e in g.player0_edges() {
        if winning[g.source(e).index()] && !winning[g.target(e).index()] {
            unsafe_edges.set(e.index(), true);
            colive.set(e.index(), false);
        }
    }
    // Constraints only matter inside the winning region.
    for e in colive.clone().iter_ones() {
        if !winning[g.source(EdgeId(e as u32)).index()] {
            colive.set(e, false);
        }
    }
    (
        winning,
        BoundedPestel {
            unsafe_edges,
            colive_edges: colive,
        },
    )
}

/// Co-Büchi synthesis on the full graph.
pub fn co_buechi_template(g: &GameGraph, stay: &NodeSet) -> (NodeSet, BoundedPestel) {
    co_buechi_template_within(g, stay, &g.full_node_set())
}

/// Drops the live groups of a full template by marking all non-live outgoing
/// edges of every live-group source co-live: `D' = D ∪ {(q,q') ∉ H ∪ S |
/// (q,·) ∈ H}` per group `H`.
pub fn bound_pestel(g: &GameGraph, full: &FullPestel) -> BoundedPestel {
    let mut colive = full.colive_edges.clone();
    for group in &full.live_groups {
        let mut sources = g.empty_node_set();
        for e in group.iter_ones() {
            let e = EdgeId(e as u32);
            debug_assert!(g.is_player0_edge(e), "live groups hold Player-0 edges");
            sources.set(g.source(e).index(), true);
        }
        for q in sources.iter_ones() {
            let q = NodeId(q as u32);
            if g.owner(q) != Player::Zero {
                continue;
            }
            for e in g.out_edges(q) {
                if !group[e.index()] && !full.unsafe_edges[e.index()] {
                    colive.set(e.index(), true);
                }
            }
        }
    }
    colive &= !full.unsafe_edges.clone();
    BoundedPestel {
        unsafe_edges: full.unsafe_edges.clone(),
        colive_edges: colive,
    }
}

/// Whether the reachable play graph of a finite-memory strategy follows the
/// template: no unsafe edge is reachable and no co-live edge lies on a
/// reachable cycle.
pub fn follows_pestel(g: &GameGraph, t: &BoundedPestel, prod: &StrategyProduct) -> bool {
    for e in t.unsafe_edges.iter_ones() {
        if prod.uses(EdgeId(e as u32)) {
            return false;
        }
    }
    let (comp, _) = components(g, prod);
    for e in t.colive_edges.iter_ones() {
        let e = EdgeId(e as u32);
        if !prod.uses(e) {
            continue;
        }
        let (u, v) = (g.source(e).index(), g.target(e).index());
        if comp[u] != usize::MAX && comp[u] == comp[v] {
            return false;
        }
    }
    true
}
