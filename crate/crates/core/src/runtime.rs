//! Online strategy selection over templates, edge-failure robustness, and
//! play simulation.
//!
//! At runtime the controller picks, among the edges the template activates at
//! the current credit, the one a dynamic preference function ranks highest.
//! Preferences below a threshold model blocked or failing actuation; as long
//! as no node loses its entire minimal-activation edge set, the current
//! template stays optimal for the reduced graph, and otherwise a hot-started
//! recomputation from the current activation function is exact.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::TemplateError;
use crate::fixpoint::{fixpoint, winning_region_unknown_credit, FixpointStats};
use crate::format::ParseError;
use crate::game::{EdgeId, EdgeSet, GameGraph, NodeId, NodeSet, Player};
use crate::qastel::{PositionalStrategy, Qastel};
use crate::value::Value;

/// A preference snapshot at one time step: values in `[0, 1]` per Player-0
/// edge, defaulting to 1.0 for edges not mentioned.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PreferenceSample {
    pub t: u64,
    values: BTreeMap<u32, f64>,
}

impl PreferenceSample {
    pub fn new(t: u64) -> PreferenceSample {
        PreferenceSample {
            t,
            values: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, e: EdgeId, pref: f64) {
        assert!(
            (0.0..=1.0).contains(&pref),
            "preference {pref} outside [0, 1]"
        );
        self.values.insert(e.0, pref);
    }

    pub fn get(&self, e: EdgeId) -> f64 {
        self.values.get(&e.0).copied().unwrap_or(1.0)
    }

    /// Player-0 edges whose preference lies strictly below `epsilon`.
    pub fn blocked_edges(&self, g: &GameGraph, epsilon: f64) -> EdgeSet {
        let mut out = g.empty_edge_set();
        for e in g.player0_edges() {
            if self.get(e) < epsilon {
                out.set(e.index(), true);
            }
        }
        out
    }
}

/// A replayable preference stream: the effective sample at step `t` merges
/// all samples with timestamp at most `t`, later timestamps overriding.
#[derive(Clone, Debug, Default)]
pub struct PreferenceStream {
    samples: Vec<PreferenceSample>,
}

impl PreferenceStream {
    pub fn new(mut samples: Vec<PreferenceSample>) -> PreferenceStream {
        samples.sort_by_key(|s| s.t);
        PreferenceStream { samples }
    }

    pub fn at(&self, t: u64) -> PreferenceSample {
        let mut merged = PreferenceSample::new(t);
        for s in self.samples.iter().take_while(|s| s.t <= t) {
            for (&e, &p) in &s.values {
                merged.values.insert(e, p);
            }
        }
        merged
    }
}

/// Parses a preference stream from CSV lines `t,edge_id,pref` (a leading
/// header row is accepted).
pub fn parse_preference_stream(
    text: &str,
    g: &GameGraph,
) -> Result<PreferenceStream, ParseError> {
    let mut by_t: BTreeMap<u64, PreferenceSample> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() || (line == 1 && body.starts_with("t,")) || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(ParseError::Syntax {
                line,
                message: "expected `t,edge_id,pref`".into(),
            });
        }
        let t: u64 = fields[0].parse().map_err(|_| ParseError::Syntax {
            line,
            message: format!("bad timestamp `{}`", fields[0]),
        })?;
        let e: usize = fields[1].parse().map_err(|_| ParseError::Syntax {
            line,
            message: format!("bad edge id `{}`", fields[1]),
        })?;
        if e >= g.edge_count() {
            return Err(ParseError::Syntax {
                line,
                message: format!("edge id {e} out of range"),
            });
        }
        let p: f64 = fields[2].parse().map_err(|_| ParseError::Syntax {
            line,
            message: format!("bad preference `{}`", fields[2]),
        })?;
        if !(0.0..=1.0).contains(&p) {
            return Err(ParseError::Syntax {
                line,
                message: format!("preference {p} outside [0, 1]"),
            });
        }
        by_t
            .entry(t)
            .or_insert_with(|| PreferenceSample::new(t))
            .set(EdgeId(e as u32), p);
    }
    Ok(PreferenceStream::new(by_t.into_values().collect()))
}

/// The active edge of maximal preference; ties go to the lowest edge id.
pub fn preferred_move(
    g: &GameGraph,
    t: &Qastel,
    v: NodeId,
    credit: i64,
    pref: &PreferenceSample,
) -> Result<EdgeId, TemplateError> {
    let active = t.active_edges_signed(g, v, credit)?;
    active
        .into_iter()
        .max_by(|&a, &b| {
            pref.get(a)
                .partial_cmp(&pref.get(b))
                .expect("preferences are finite")
                .then(b.cmp(&a))
        })
        .ok_or(TemplateError::NoActiveEdge { node: v.index() })
}

/// The maximal-preference active edge with preference strictly above
/// `epsilon`, or `None` when every active edge is filtered out (the current
/// template cannot continue controlling the play).
pub fn preferred_move_filtered(
    g: &GameGraph,
    t: &Qastel,
    v: NodeId,
    credit: i64,
    pref: &PreferenceSample,
    epsilon: f64,
) -> Result<Option<EdgeId>, TemplateError> {
    let active = t.active_edges_signed(g, v, credit)?;
    Ok(active
        .into_iter()
        .filter(|&e| pref.get(e) > epsilon)
        .max_by(|&a, &b| {
            pref.get(a)
                .partial_cmp(&pref.get(b))
                .expect("preferences are finite")
                .then(b.cmp(&a))
        }))
}

/// True iff no Player-0 node has its entire minimal-activation edge set
/// inside `blocked`; the current template then remains optimal for the graph
/// with the blocked edges removed.
pub fn min_edges_intact(g: &GameGraph, t: &Qastel, blocked: &EdgeSet) -> bool {
    g.nodes()
        .filter(|&u| g.owner(u) == Player::Zero)
        .all(|u| {
            t.min_edges(g, u)
                .expect("owner filtered")
                .iter()
                .any(|&e| !blocked[e.index()])
        })
}

/// Recomputes the template after deleting Player-0 edges, hot-started from
/// the current activation function. Deleted edges are pinned to infinite
/// activation, which is equivalent to removing them since their sources are
/// Player-0 nodes with a surviving alternative.
pub fn recompute_after_deletion(
    g: &GameGraph,
    t: &Qastel,
    deleted: &EdgeSet,
) -> Result<(NodeSet, Qastel, FixpointStats), TemplateError> {
    for e in deleted.iter_ones() {
        if !g.is_player0_edge(EdgeId(e as u32)) {
            return Err(TemplateError::NotPlayerZeroEdge { edge: e });
        }
    }
    for u in g.nodes() {
        if g.owner(u) == Player::Zero && g.out_edges(u).all(|e| deleted[e.index()]) {
            return Err(TemplateError::DeletionCreatesDeadEnd { node: u.index() });
        }
    }
    let mut init = t.as_edge_values();
    for e in deleted.iter_ones() {
        init.set(EdgeId(e as u32), Value::INFINITY);
    }
    let (fix, stats) = fixpoint(g, init);
    let region = winning_region_unknown_credit(g, &fix);
    Ok((region, Qastel::from_edge_values(g, &fix), stats))
}

/// How the environment player moves in a simulation.
#[derive(Clone, Debug)]
pub enum Adversary {
    /// Seeded uniform choice over the node's successors.
    Random { seed: u64 },
    /// A fixed positional counter-strategy.
    Positional(PositionalStrategy),
}

impl Adversary {
    fn describe(&self) -> String {
        match self {
            Adversary::Random { seed } => format!("random({seed})"),
            Adversary::Positional(_) => "positional".into(),
        }
    }
}

/// A controller decision at a Player-0 node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlDecision {
    Take(EdgeId),
    Blocked,
}

/// Events a run records alongside the traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimEvent {
    /// The controller could not continue.
    Blocked,
    /// The template released the play (no active edge at the current credit).
    Released,
    /// The controller recomputed its template after deletions.
    Recomputed { deleted: usize },
}

impl SimEvent {
    fn label(&self) -> String {
        match self {
            SimEvent::Blocked => "blocked".into(),
            SimEvent::Released => "released".into(),
            SimEvent::Recomputed { deleted } => format!("recomputed({deleted})"),
        }
    }
}

/// An online policy for Player 0.
pub trait Controller {
    fn choose(&mut self, g: &GameGraph, node: NodeId, credit: i64, step: usize)
        -> ControlDecision;
    /// Observes every transition of the play, including the adversary's.
    fn observe(&mut self, _g: &GameGraph, _edge: EdgeId) {}
    /// Events produced since the last call; drained by the simulator.
    fn take_events(&mut self) -> Vec<SimEvent> {
        Vec::new()
    }
}

/// Plays a fixed positional strategy; blocked where it is undefined.
pub struct StrategyController(pub PositionalStrategy);

impl Controller for StrategyController {
    fn choose(&mut self, _g: &GameGraph, node: NodeId, _credit: i64, _step: usize)
        -> ControlDecision {
        match self.0.get(node) {
            Some(e) => ControlDecision::Take(e),
            None => ControlDecision::Blocked,
        }
    }
}

/// Whether a template controller reacts to violated minimal-edge conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockedPolicy {
    /// Keep the original template; terminate when every active edge is
    /// filtered out.
    Terminate,
    /// Once some node's entire minimal-activation edge set is blocked, the
    /// stale template may activate edges that are no longer winning in the
    /// reduced graph: delete the blocked edges and hot-start a
    /// recomputation, then keep playing against the updated template.
    Recompute,
}

/// Follows a template, maximizing preference over active edges with
/// preferences above `epsilon`.
pub struct TemplateController {
    pub qastel: Qastel,
    pub prefs: PreferenceStream,
    pub epsilon: f64,
    pub policy: BlockedPolicy,
    deleted: EdgeSet,
    events: Vec<SimEvent>,
}

impl TemplateController {
    pub fn new(
        g: &GameGraph,
        qastel: Qastel,
        prefs: PreferenceStream,
        epsilon: f64,
        policy: BlockedPolicy,
    ) -> TemplateController {
        TemplateController {
            qastel,
            prefs,
            epsilon,
            policy,
            deleted: g.empty_edge_set(),
            events: Vec::new(),
        }
    }
}

impl Controller for TemplateController {
    fn choose(&mut self, g: &GameGraph, node: NodeId, credit: i64, step: usize)
        -> ControlDecision {
        let sample = self.prefs.at(step as u64);
        if self.policy == BlockedPolicy::Recompute {
            let mut doomed = sample.blocked_edges(g, self.epsilon);
            doomed |= self.deleted.clone();
            if doomed != self.deleted && !min_edges_intact(g, &self.qastel, &doomed) {
                // Deletions that would strand a node are not applicable; the
                // stale template is all that is left then.
                if let Ok((_, next, _)) = recompute_after_deletion(g, &self.qastel, &doomed) {
                    self.qastel = next;
                    self.deleted = doomed;
                    self.events.push(SimEvent::Recomputed {
                        deleted: self.deleted.count_ones(),
                    });
                }
            }
        }
        let active = match self.qastel.active_edges_signed(g, node, credit) {
            Ok(a) => a,
            Err(_) => return ControlDecision::Blocked,
        };
        if active.is_empty() {
            self.events.push(SimEvent::Released);
            return ControlDecision::Blocked;
        }
        match preferred_move_filtered(g, &self.qastel, node, credit, &sample, self.epsilon) {
            Ok(Some(e)) => ControlDecision::Take(e),
            _ => ControlDecision::Blocked,
        }
    }

    fn take_events(&mut self) -> Vec<SimEvent> {
        std::mem::take(&mut self.events)
    }
}

/// Drives a combined multi-objective strategy.
pub struct CombinedController(pub crate::multi::CombinedStrategy);

impl Controller for CombinedController {
    fn choose(&mut self, g: &GameGraph, node: NodeId, _credit: i64, _step: usize)
        -> ControlDecision {
        match self.0.next_edge(g, node) {
            Ok(e) => ControlDecision::Take(e),
            Err(_) => ControlDecision::Blocked,
        }
    }

    fn observe(&mut self, _g: &GameGraph, edge: EdgeId) {
        self.0.advance(edge);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimStatus {
    Completed,
    Blocked { step: usize },
}

/// Recorded traces of one simulated play.
#[derive(Clone, Debug)]
pub struct SimulationRun {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub credits: Vec<i64>,
    pub events: Vec<(usize, SimEvent)>,
    pub status: SimStatus,
    pub adversary: String,
}

impl SimulationRun {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn min_credit(&self) -> i64 {
        *self.credits.iter().min().expect("trace is never empty")
    }

    /// Trace CSV: `step,node,credit,edge_taken,event`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,node,credit,edge_taken,event\n");
        for i in 0..self.nodes.len() {
            let edge = self
                .edges
                .get(i)
                .map(|e| e.index().to_string())
                .unwrap_or_default();
            let events: Vec<String> = self
                .events
                .iter()
                .filter(|(s, _)| *s == i)
                .map(|(_, e)| e.label())
                .collect();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i,
                self.nodes[i].index(),
                self.credits[i],
                edge,
                events.join(";")
            ));
        }
        out
    }
}

/// Runs a play for at most `steps` steps. Deterministic given the adversary
/// seed and a deterministic controller.
pub fn simulate(
    g: &GameGraph,
    controller: &mut dyn Controller,
    adversary: &Adversary,
    start: NodeId,
    credit0: i64,
    steps: usize,
) -> SimulationRun {
    let mut rng = match adversary {
        Adversary::Random { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        Adversary::Positional(_) => None,
    };
    let mut run = SimulationRun {
        nodes: vec![start],
        edges: Vec::new(),
        credits: vec![credit0],
        events: Vec::new(),
        status: SimStatus::Completed,
        adversary: adversary.describe(),
    };
    let mut at = start;
    let mut credit = credit0;
    for step in 0..steps {
        let edge = match g.owner(at) {
            Player::Zero => {
                let decision = controller.choose(g, at, credit, step);
                for ev in controller.take_events() {
                    run.events.push((step, ev));
                }
                match decision {
                    ControlDecision::Take(e) => {
                        assert_eq!(g.source(e), at, "controller moved from the wrong node");
                        e
                    }
                    ControlDecision::Blocked => {
                        run.events.push((step, SimEvent::Blocked));
                        run.status = SimStatus::Blocked { step };
                        return run;
                    }
                }
            }
            Player::One => match adversary {
                Adversary::Random { .. } => {
                    let rng = rng.as_mut().expect("random adversary has an rng");
                    let degree = g.out_degree(at);
                    g.out_edges(at)
                        .nth(rng.random_range(0..degree))
                        .expect("graphs have no dead ends")
                }
                Adversary::Positional(pi) => pi.edge(at),
            },
        };
        controller.observe(g, edge);
        credit += g.weight(edge);
        at = g.target(edge);
        run.edges.push(edge);
        run.nodes.push(at);
        run.credits.push(credit);
    }
    run
}
