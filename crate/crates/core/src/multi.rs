//! Strategy combination for conjunctions of mean-payoff objectives.
//!
//! Templates for different weight functions over the same graph cannot be
//! merged into one template (winning the conjunction can require infinite
//! memory), but winning strategies can: synthesize one template per
//! dimension, shrink to the common winning region by pinning edges that
//! leave it, extract one positional strategy per dimension, and time-share
//! between them.
//!
//! The scheduler works in rounds. A dimension has peaked in round r once its
//! global running average has reached -1/r; the round completes when every
//! dimension has peaked, and the next round tightens the bar. Within a round
//! the scheduler normally plays, at every step, the extracted strategy of
//! the currently most deficient dimension (balance mode): whenever some
//! stationary mix of the component strategies' cycle gains is nonnegative in
//! every dimension, this keeps all cumulative weights bounded, so every
//! running average tends to 0 and rounds complete almost immediately. If a
//! round overstays its deadline, the dimensions that have not peaked are
//! served one by one in exclusive blocks (block mode): a block ends when the
//! dimension's cumulative weight is nonnegative, or when the weight has
//! stopped improving for a full cycle window while the average has still
//! reached -1/r. Blocks always end: the strategy's cycle gains either lift
//! the total to 0 or stall it at a frozen deficit, and a frozen deficit is
//! diluted over the bar in finite time. Rounds therefore always complete,
//! every dimension reaches -1/r infinitely often for every r, and the limsup
//! of every running average is nonnegative against any adversary. On
//! adversarially coupled instances (where every play winning the conjunction
//! provably needs peak gaps that grow geometrically) the block lengths grow
//! without bound; the balance mode exists so that everywhere else the
//! averages hover near their limits instead.
//!
//! Conjunctions of energy objectives are deliberately not offered: they may
//! have no winning strategy even when all per-dimension regions coincide.

use crate::error::TemplateError;
use crate::fixpoint::{EdgeValues, FixpointStats};
use crate::game::{EdgeId, GameGraph, NodeId, NodeSet, Player, Successor};
use crate::qastel::{compute_qastel, PositionalStrategy, Qastel};
use crate::value::Value;

/// A game graph together with `k` integer weight functions over its edges.
#[derive(Clone, Debug)]
pub struct MultiMpProblem {
    pub graph: GameGraph,
    pub weights: Vec<Vec<i64>>,
}

impl MultiMpProblem {
    pub fn new(graph: GameGraph, weights: Vec<Vec<i64>>) -> MultiMpProblem {
        assert!(!weights.is_empty(), "at least one objective is required");
        for w in &weights {
            assert_eq!(
                w.len(),
                graph.edge_count(),
                "every weight function must cover every edge"
            );
        }
        MultiMpProblem { graph, weights }
    }

    pub fn dimensions(&self) -> usize {
        self.weights.len()
    }

    /// The base graph re-weighted with dimension `i`.
    fn reweighted(&self, i: usize) -> GameGraph {
        let g = &self.graph;
        let owners = g.nodes().map(|u| g.owner(u)).collect();
        let succ = g
            .nodes()
            .map(|u| {
                g.out_edges(u)
                    .map(|e| Successor {
                        target: g.target(e),
                        weight: self.weights[i][e.index()],
                    })
                    .collect()
            })
            .collect();
        GameGraph::new(owners, succ).expect("re-weighting preserves structure")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SchedulerMode {
    /// Play the most deficient dimension, re-evaluated every step.
    Balance,
    /// Serve one not-yet-peaked dimension exclusively.
    Block(usize),
}

/// Infinite-memory strategy produced by [`combine_qastel`]: positional
/// component strategies plus the round-based time-sharing state.
#[derive(Clone, Debug)]
pub struct CombinedStrategy {
    weights: Vec<Vec<i64>>,
    strategies: Vec<PositionalStrategy>,
    winning: NodeSet,
    mode: SchedulerMode,
    round: u64,
    /// Step at which the current round began.
    round_start: u64,
    /// Which dimensions have reached the -1/r bar this round.
    peaked: Vec<bool>,
    totals: Vec<i128>,
    steps: u64,
    /// Length of the current exclusive block.
    block_len: u64,
    /// Best cumulative weight of the block's dimension within the block.
    block_best: i128,
    /// Steps since `block_best` last improved.
    stagnant: u64,
    /// Stagnation window: long enough to contain any simple cycle.
    window: u64,
    /// Balance-mode budget per round before falling back to blocks.
    deadline: u64,
}

impl CombinedStrategy {
    pub fn winning_region(&self) -> &NodeSet {
        &self.winning
    }

    /// The dimension whose strategy the next move comes from.
    pub fn active_dimension(&self) -> usize {
        match self.mode {
            SchedulerMode::Block(dim) => dim,
            SchedulerMode::Balance => self.neediest(),
        }
    }

    /// True while the scheduler serves one dimension exclusively.
    pub fn in_block(&self) -> bool {
        matches!(self.mode, SchedulerMode::Block(_))
    }

    /// Length of the current exclusive block (0 in balance mode).
    pub fn block_len(&self) -> u64 {
        self.block_len
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn neediest(&self) -> usize {
        (0..self.totals.len())
            .min_by_key(|&i| self.totals[i])
            .expect("at least one dimension")
    }

    pub fn component(&self, i: usize) -> &PositionalStrategy {
        &self.strategies[i]
    }

    /// Global running average of dimension `i`; `None` before the first step.
    pub fn running_average(&self, i: usize) -> Option<f64> {
        (self.steps > 0).then(|| self.totals[i] as f64 / self.steps as f64)
    }

    /// The move of the active component strategy at a Player-0 node inside
    /// the combined winning region.
    pub fn next_edge(&self, g: &GameGraph, node: NodeId) -> Result<EdgeId, TemplateError> {
        if !self.winning[node.index()] {
            return Err(TemplateError::OutsideWinningRegion { node: node.index() });
        }
        if g.owner(node) != Player::Zero {
            return Err(TemplateError::NotPlayerZero { node: node.index() });
        }
        Ok(self.strategies[self.active_dimension()].edge(node))
    }

    /// Records a play step (any player's move) and updates the scheduling
    /// state: peak bookkeeping for the round, the balance/block mode switch,
    /// and block termination.
    pub fn advance(&mut self, edge: EdgeId) {
        let acting = self.active_dimension();
        self.steps += 1;
        for (i, w) in self.weights.iter().enumerate() {
            self.totals[i] += w[edge.index()] as i128;
        }
        // avg_i >= -1/r without division: totals * r >= -steps.
        for i in 0..self.totals.len() {
            if self.totals[i] * self.round as i128 >= -(self.steps as i128) {
                self.peaked[i] = true;
            }
        }
        match self.mode {
            SchedulerMode::Balance => {
                if self.peaked.iter().all(|&p| p) {
                    self.complete_round();
                } else if self.steps - self.round_start > self.deadline * self.round {
                    let dim = self.peaked.iter().position(|&p| !p).unwrap();
                    self.enter_block(dim);
                }
            }
            SchedulerMode::Block(dim) => {
                self.block_len += 1;
                let total = self.totals[acting];
                if total > self.block_best {
                    self.block_best = total;
                    self.stagnant = 0;
                } else {
                    self.stagnant += 1;
                }
                let done = self.peaked[dim]
                    && (total >= 0 || self.stagnant >= self.window);
                if done {
                    match self.peaked.iter().position(|&p| !p) {
                        Some(next) => self.enter_block(next),
                        None => self.complete_round(),
                    }
                }
            }
        }
    }

    fn enter_block(&mut self, dim: usize) {
        self.mode = SchedulerMode::Block(dim);
        self.block_best = self.totals[dim];
        self.block_len = 0;
        self.stagnant = 0;
    }

    fn complete_round(&mut self) {
        self.round += 1;
        self.round_start = self.steps;
        self.mode = SchedulerMode::Balance;
        self.block_len = 0;
        for p in self.peaked.iter_mut() {
            *p = false;
        }
    }
}

/// Conjunction synthesis over multiple mean-payoff objectives: iterates
/// per-dimension template synthesis, intersecting winning regions and
/// pinning edges that leave the intersection until it stabilizes, then
/// wraps the extracted per-dimension strategies in the scheduler.
pub fn combine_qastel(p: &MultiMpProblem) -> (NodeSet, CombinedStrategy, FixpointStats) {
    let g = &p.graph;
    let k = p.dimensions();
    let graphs: Vec<GameGraph> = (0..k).map(|i| p.reweighted(i)).collect();
    let mut acts: Vec<EdgeValues> = (0..k).map(|_| EdgeValues::zero(g)).collect();
    let mut stats = FixpointStats::default();
    let mut templates: Vec<Qastel> = Vec::new();

    let run_all = |acts: &mut Vec<EdgeValues>,
                       templates: &mut Vec<Qastel>,
                       stats: &mut FixpointStats|
     -> NodeSet {
        templates.clear();
        let mut joint = g.full_node_set();
        for i in 0..k {
            let (region, template, s) = compute_qastel(&graphs[i], acts[i].clone(), None);
            acts[i] = template.as_edge_values();
            templates.push(template);
            stats.accumulate(&s);
            joint &= region;
        }
        joint
    };

    let mut current = g.full_node_set();
    let mut next = run_all(&mut acts, &mut templates, &mut stats);
    let mut rounds = 0usize;
    while current != next {
        rounds += 1;
        assert!(
            rounds <= g.node_count(),
            "intersection loop exceeded |V| rounds"
        );
        for e in g.edges() {
            if next[g.source(e).index()]
                && current[g.target(e).index()]
                && !next[g.target(e).index()]
            {
                debug_assert!(
                    g.is_player0_edge(e),
                    "only Player-0 edges leave a winning-region intersection"
                );
                for act in acts.iter_mut() {
                    act.set(e, Value::INFINITY);
                }
            }
        }
        current = next;
        next = run_all(&mut acts, &mut templates, &mut stats);
    }

    let strategies: Vec<PositionalStrategy> = (0..k)
        .map(|i| templates[i].extract_strategy(&graphs[i]))
        .collect();
    let w_max = p
        .weights
        .iter()
        .flatten()
        .map(|w| w.unsigned_abs())
        .max()
        .unwrap_or(0)
        .max(1);
    let strategy = CombinedStrategy {
        weights: p.weights.clone(),
        strategies,
        winning: next.clone(),
        mode: SchedulerMode::Balance,
        round: 1,
        round_start: 0,
        peaked: vec![false; k],
        totals: vec![0; k],
        steps: 0,
        block_len: 0,
        block_best: 0,
        stagnant: 0,
        window: 4 * (g.node_count() as u64 + 1),
        deadline: 64 * g.node_count() as u64 * w_max,
    };
    (next, strategy, stats)
}
