//! Benchmark harness: three experiments over seeded random games, each
//! emitting one CSV record per (instance, repetition/step/fraction).
//!
//! All CSV output is a deterministic function of the configuration and seed;
//! wall-clock timings are reported separately on stderr by the CLI so that
//! repeated runs stay byte-identical. Costs in the CSV are measured in
//! fixpoint lifts, which are machine-independent.

use qastel_core::fixpoint::{fixpoint, node_from_edge_values, EdgeValues};
use qastel_core::game::{EdgeId, EdgeSet, GameGraph, NodeId, NodeSet, Player};
use qastel_core::mistel::{compute_mistel, incremental_mistel, MistelState};
use qastel_core::qastel::{PositionalStrategy, Qastel};
use qastel_core::value::Value;
use qastel_core::verify::verify_strategy_mp_cobuechi;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gen::generate_random_game;

/// Shared experiment parameters.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub seed: u64,
    pub instances: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub avg_degree: f64,
    pub max_weight: i64,
    /// Avoidance-region fractions: the per-step increment schedule for the
    /// incremental experiment and the per-run fractions for the conflict
    /// experiment.
    pub avoidance_fractions: Vec<f64>,
    /// Co-Büchi objectives added per incremental run.
    pub increments: usize,
    /// Deletion repetitions per graph in the fault-tolerance experiment.
    pub repetitions: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            seed: 1,
            instances: 20,
            min_nodes: 200,
            max_nodes: 2000,
            avg_degree: 3.0,
            max_weight: 5,
            avoidance_fractions: vec![0.004, 0.06, 0.12],
            increments: 5,
            repetitions: 10,
        }
    }
}

impl BenchConfig {
    fn validate(&self) {
        assert!(self.instances > 0 && self.repetitions > 0);
        assert!(self.min_nodes >= 1 && self.min_nodes <= self.max_nodes);
        assert!(self
            .avoidance_fractions
            .iter()
            .all(|f| (0.0..=1.0).contains(f)));
    }

    fn instance_graph(&self, instance: usize) -> GameGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (instance as u64).wrapping_mul(0x9e37));
        let n = rng.random_range(self.min_nodes..=self.max_nodes);
        generate_random_game(
            self.seed.wrapping_add(instance as u64),
            n,
            self.avg_degree,
            self.max_weight,
        )
    }
}

/// One row of the fault-tolerance experiment: how many random Player-0 edge
/// deletions a graph absorbs before some optimal value changes.
#[derive(Clone, Debug, PartialEq)]
pub struct FaultRecord {
    pub instance: usize,
    pub repetition: usize,
    pub nodes: usize,
    pub p0_edges: usize,
    pub deletions: usize,
    /// Deleted fraction of Player-0 edges at the first value change (1.0 when
    /// the candidate pool ran out without a change).
    pub fraction: f64,
    pub changed: bool,
}

pub const FAULT_CSV_HEADER: &str =
    "experiment,instance,repetition,nodes,p0_edges,deletions,fraction,changed";

pub fn fault_records_to_csv(records: &[FaultRecord]) -> String {
    let mut out = String::from(FAULT_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "fault,{},{},{},{},{},{:.6},{}\n",
            r.instance, r.repetition, r.nodes, r.p0_edges, r.deletions, r.fraction, r.changed
        ));
    }
    out
}

/// Tracks, per Player-0 node, how many of its minimal-activation edges
/// survive deletion, so each deletion is O(out-degree) instead of O(|E|).
struct MinTracker {
    min_value: Vec<Value>,
    min_remaining: Vec<usize>,
}

impl MinTracker {
    fn build(g: &GameGraph, act: &EdgeValues, deleted: &EdgeSet) -> MinTracker {
        let mut min_value = vec![Value::INFINITY; g.node_count()];
        let mut min_remaining = vec![0usize; g.node_count()];
        for u in g.nodes() {
            if g.owner(u) != Player::Zero {
                continue;
            }
            let min = g
                .out_edges(u)
                .filter(|&e| !deleted[e.index()])
                .map(|e| act.get(e))
                .min()
                .expect("deletions keep totality");
            min_value[u.index()] = min;
            min_remaining[u.index()] = g
                .out_edges(u)
                .filter(|&e| !deleted[e.index()] && act.get(e) == min)
                .count();
        }
        MinTracker {
            min_value,
            min_remaining,
        }
    }

    /// Records a deletion; true when the source node just lost its last
    /// minimal edge (the condition of the robustness proposition).
    fn delete(&mut self, g: &GameGraph, act: &EdgeValues, e: EdgeId) -> bool {
        let u = g.source(e);
        if act.get(e) != self.min_value[u.index()] {
            return false;
        }
        self.min_remaining[u.index()] -= 1;
        self.min_remaining[u.index()] == 0
    }
}

/// Deletes random Player-0 edges one at a time (keeping every node total)
/// and records the deleted fraction at which some node's optimal value first
/// changes. Violations of the minimal-edge condition trigger a hot-started
/// recomputation; only a confirmed value change stops the run.
pub fn bench_fault_tolerance(cfg: &BenchConfig) -> Vec<FaultRecord> {
    cfg.validate();
    let mut records = Vec::new();
    for instance in 0..cfg.instances {
        let g = cfg.instance_graph(instance);
        let (base_fix, _) = fixpoint(&g, EdgeValues::zero(&g));
        let base_vals = node_from_edge_values(&g, &base_fix);
        let p0_edges = g.player0_edge_count();

        for repetition in 0..cfg.repetitions {
            let mut rng = ChaCha8Rng::seed_from_u64(
                cfg.seed ^ ((instance as u64) << 20) ^ (repetition as u64),
            );
            let mut act = base_fix.clone();
            let mut vals = base_vals.clone();
            let mut deleted = g.empty_edge_set();
            let mut remaining_degree: Vec<usize> =
                g.nodes().map(|u| g.out_degree(u)).collect();
            let mut tracker = MinTracker::build(&g, &act, &deleted);
            let mut candidates: Vec<EdgeId> = g.player0_edges().collect();
            candidates.shuffle(&mut rng);
            let mut deletions = 0usize;
            let mut changed = false;

            while let Some(e) = candidates.pop() {
                let src = g.source(e);
                if remaining_degree[src.index()] < 2 {
                    continue;
                }
                deleted.set(e.index(), true);
                remaining_degree[src.index()] -= 1;
                deletions += 1;
                if !tracker.delete(&g, &act, e) {
                    continue;
                }
                // Minimal-edge condition violated: confirm via hot-started
                // recomputation whether a value actually changed.
                let mut init = act.clone();
                for d in deleted.iter_ones() {
                    init.set(EdgeId(d as u32), Value::INFINITY);
                }
                let (fix, _) = fixpoint(&g, init);
                let new_vals = node_from_edge_values(&g, &fix);
                if new_vals != vals {
                    changed = true;
                    break;
                }
                act = fix;
                vals = new_vals;
                tracker = MinTracker::build(&g, &act, &deleted);
            }

            records.push(FaultRecord {
                instance,
                repetition,
                nodes: g.node_count(),
                p0_edges,
                deletions,
                fraction: if p0_edges == 0 {
                    1.0
                } else {
                    deletions as f64 / p0_edges as f64
                },
                changed,
            });
        }
    }
    records
}

/// One row of the incremental-synthesis experiment, cumulated over the
/// objective-arrival steps of one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementalRecord {
    pub instance: usize,
    pub step: usize,
    pub nodes: usize,
    /// Fraction of nodes inside the accumulated avoidance region.
    pub avoid_fraction: f64,
    pub hot_lifts: u64,
    pub scratch_lifts: u64,
    pub hot_cum_lifts: u64,
    pub scratch_cum_lifts: u64,
    pub regions_equal: bool,
}

pub const INCREMENTAL_CSV_HEADER: &str = "experiment,instance,step,nodes,avoid_fraction,\
hot_lifts,scratch_lifts,hot_cum_lifts,scratch_cum_lifts,lift_ratio,regions_equal";

pub fn incremental_records_to_csv(records: &[IncrementalRecord]) -> String {
    let mut out = String::from(INCREMENTAL_CSV_HEADER);
    out.push('\n');
    for r in records {
        let ratio = if r.hot_cum_lifts == 0 {
            String::from("inf")
        } else {
            format!("{:.4}", r.scratch_cum_lifts as f64 / r.hot_cum_lifts as f64)
        };
        out.push_str(&format!(
            "incremental,{},{},{},{:.6},{},{},{},{},{},{}\n",
            r.instance,
            r.step,
            r.nodes,
            r.avoid_fraction,
            r.hot_lifts,
            r.scratch_lifts,
            r.hot_cum_lifts,
            r.scratch_cum_lifts,
            ratio,
            r.regions_equal
        ));
    }
    out
}

/// Solves the bare mean-payoff game, then adds co-Büchi objectives
/// incrementally per the configured avoidance schedule, comparing hot-started
/// re-synthesis against from-scratch synthesis of the accumulated
/// conjunction at every step.
pub fn bench_incremental(cfg: &BenchConfig) -> Vec<IncrementalRecord> {
    cfg.validate();
    let increment = cfg.avoidance_fractions.first().copied().unwrap_or(0.0);
    let mut records = Vec::new();
    for instance in 0..cfg.instances {
        let g = cfg.instance_graph(instance);
        let n = g.node_count();
        let mut rng =
            ChaCha8Rng::seed_from_u64(cfg.seed ^ ((instance as u64) << 32) ^ 0xA5A5);
        let base = compute_mistel(&g, g.full_node_set(), None);
        let mut hot_cum = base.stats.lifts;
        let mut scratch_cum = 0u64;
        let mut avoid = g.empty_node_set();
        let mut prior: MistelState = base;

        for step in 1..=cfg.increments {
            let fresh = sample_fresh_nodes(&mut rng, &avoid, n, increment);
            for &u in &fresh {
                avoid.set(u.index(), true);
            }
            let new_stay: Vec<NodeId> = g
                .nodes()
                .filter(|u| !fresh.contains(u))
                .collect();
            let inc = incremental_mistel(&g, &prior, &new_stay, None)
                .expect("generated node ids are in range");
            let mut stay_acc = g.full_node_set();
            stay_acc &= !avoid.clone();
            let scratch = compute_mistel(&g, stay_acc, None);

            hot_cum += inc.stats.lifts;
            scratch_cum += scratch.stats.lifts;
            records.push(IncrementalRecord {
                instance,
                step,
                nodes: n,
                avoid_fraction: avoid.count_ones() as f64 / n as f64,
                hot_lifts: inc.stats.lifts,
                scratch_lifts: scratch.stats.lifts,
                hot_cum_lifts: hot_cum,
                scratch_cum_lifts: scratch_cum,
                regions_equal: inc.mistel.winning == scratch.mistel.winning,
            });
            prior = inc;
        }
    }
    records
}

/// Fresh avoidance nodes for one increment: sampled uniformly without
/// replacement from the nodes not yet avoided.
fn sample_fresh_nodes(
    rng: &mut ChaCha8Rng,
    avoid: &NodeSet,
    n: usize,
    fraction: f64,
) -> Vec<NodeId> {
    let want = ((fraction * n as f64).round() as usize).min(n);
    let mut pool: Vec<NodeId> = (0..n as u32)
        .map(NodeId)
        .filter(|u| !avoid[u.index()])
        .collect();
    pool.shuffle(rng);
    pool.truncate(want);
    pool
}

/// One row of the conflict-resolution experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ConflictRecord {
    pub instance: usize,
    pub fraction: f64,
    pub nodes: usize,
    /// Conflict-resolution rounds (loop iterations after the first
    /// synthesis).
    pub rounds: usize,
    pub winning_size: usize,
    /// Oracle region size, for instances small enough to enumerate
    /// positional strategies.
    pub oracle_size: Option<usize>,
    pub complete: Option<bool>,
}

pub const CONFLICTS_CSV_HEADER: &str =
    "experiment,instance,fraction,nodes,rounds,winning_size,oracle_size,complete";

pub fn conflict_records_to_csv(records: &[ConflictRecord]) -> String {
    let mut out = String::from(CONFLICTS_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "conflicts,{},{:.6},{},{},{},{},{}\n",
            r.instance,
            r.fraction,
            r.nodes,
            r.rounds,
            r.winning_size,
            r.oracle_size.map(|s| s.to_string()).unwrap_or_default(),
            r.complete.map(|c| c.to_string()).unwrap_or_default()
        ));
    }
    out
}

/// Node count up to which the positional-strategy oracle is enumerated.
pub const ORACLE_NODE_LIMIT: usize = 7;

/// Runs mixed-template synthesis per avoidance fraction and records the
/// conflict-round count; on oracle-sized instances also whether the template
/// winning region matches the union of positionally-certified regions.
pub fn bench_conflict_rounds(cfg: &BenchConfig) -> Vec<ConflictRecord> {
    cfg.validate();
    let mut records = Vec::new();
    for instance in 0..cfg.instances {
        let g = cfg.instance_graph(instance);
        let n = g.node_count();
        for (fi, &fraction) in cfg.avoidance_fractions.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(
                cfg.seed ^ ((instance as u64) << 24) ^ ((fi as u64) << 8),
            );
            let avoid = sample_fresh_nodes(&mut rng, &g.empty_node_set(), n, fraction);
            let mut stay = g.full_node_set();
            for u in &avoid {
                stay.set(u.index(), false);
            }
            let out = compute_mistel(&g, stay.clone(), None);
            let (oracle_size, complete) = if n <= ORACLE_NODE_LIMIT {
                let oracle = positional_oracle_region(&g, &stay);
                (
                    Some(oracle.count_ones()),
                    Some(oracle == out.mistel.winning),
                )
            } else {
                (None, None)
            };
            records.push(ConflictRecord {
                instance,
                fraction,
                nodes: n,
                rounds: out.rounds - 1,
                winning_size: out.mistel.winning.count_ones(),
                oracle_size,
                complete,
            });
        }
    }
    records
}

/// Union over all positional strategies of the region each one provably wins
/// for the conjunction of mean-payoff and co-Büchi.
pub fn positional_oracle_region(g: &GameGraph, stay: &NodeSet) -> NodeSet {
    let mut union = g.empty_node_set();
    for pi in all_positional_strategies(g) {
        union |= verify_strategy_mp_cobuechi(g, &pi, stay);
    }
    union
}

/// Enumerates every positional Player-0 strategy; feasible on oracle-sized
/// instances only.
pub fn all_positional_strategies(g: &GameGraph) -> Vec<PositionalStrategy> {
    let p0: Vec<NodeId> = g
        .nodes()
        .filter(|&u| g.owner(u) == Player::Zero)
        .collect();
    let mut out = Vec::new();
    let mut picks = vec![0usize; p0.len()];
    loop {
        let mut strat = PositionalStrategy::empty(g);
        for (i, &u) in p0.iter().enumerate() {
            strat.set(u, g.out_edges(u).nth(picks[i]).unwrap());
        }
        out.push(strat);
        let mut i = 0;
        loop {
            if i == p0.len() {
                return out;
            }
            picks[i] += 1;
            if picks[i] < g.out_degree(p0[i]) {
                break;
            }
            picks[i] = 0;
            i += 1;
        }
    }
}

/// The optimal-template CSV for one graph, exposed for the `qastel`
/// subcommand and the schema tests.
pub fn qastel_csv(g: &GameGraph) -> String {
    let (fix, _) = fixpoint(g, EdgeValues::zero(g));
    Qastel::from_edge_values(g, &fix).to_csv(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qastel_core::runtime::min_edges_intact;

    fn tiny_cfg() -> BenchConfig {
        BenchConfig {
            seed: 7,
            instances: 3,
            min_nodes: 6,
            max_nodes: 7,
            avg_degree: 2.5,
            max_weight: 2,
            avoidance_fractions: vec![0.25, 0.5],
            increments: 3,
            repetitions: 2,
        }
    }

    #[test]
    fn fault_records_are_deterministic() {
        let cfg = tiny_cfg();
        let a = bench_fault_tolerance(&cfg);
        let b = bench_fault_tolerance(&cfg);
        assert_eq!(a, b);
        assert_eq!(a.len(), cfg.instances * cfg.repetitions);
        assert_eq!(fault_records_to_csv(&a), fault_records_to_csv(&b));
    }

    #[test]
    fn forced_change_at_first_deletion() {
        // Node 0 owns two edges with distinct values; deleting its unique
        // minimal edge (the +1 self-loop) forces the value change at once.
        // The deletion order is driven by the seeded shuffle, so assert on
        // the violation machinery directly.
        let g = crate::gen::generate_random_game(1, 1, 1.0, 0);
        let _ = g; // the interesting check lives on the handcrafted graph below
        use qastel_core::game::{Player, Successor};
        let owners = vec![Player::Zero];
        let succ = vec![vec![
            Successor {
                target: NodeId(0),
                weight: 1,
            },
            Successor {
                target: NodeId(0),
                weight: -1,
            },
        ]];
        let g = GameGraph::new(owners, succ).unwrap();
        let (fix, _) = fixpoint(&g, EdgeValues::zero(&g));
        let tracker_act = fix.clone();
        let mut tracker = MinTracker::build(&g, &tracker_act, &g.empty_edge_set());
        // Deleting the minimal edge e0 (value 0) empties the argmin set.
        assert!(tracker.delete(&g, &tracker_act, EdgeId(0)));
        // And the recomputed values genuinely change.
        let mut init = fix.clone();
        init.set(EdgeId(0), Value::INFINITY);
        let (fix2, _) = fixpoint(&g, init);
        assert_ne!(
            node_from_edge_values(&g, &fix),
            node_from_edge_values(&g, &fix2)
        );
    }

    #[test]
    fn duplicate_minimal_edges_survive_single_deletions() {
        // Two identical minimal edges: deleting one keeps the condition
        // intact and the values unchanged.
        use qastel_core::game::{Player, Successor};
        let owners = vec![Player::Zero];
        let succ = vec![vec![
            Successor {
                target: NodeId(0),
                weight: 1,
            },
            Successor {
                target: NodeId(0),
                weight: 1,
            },
            Successor {
                target: NodeId(0),
                weight: -1,
            },
        ]];
        let g = GameGraph::new(owners, succ).unwrap();
        let (fix, _) = fixpoint(&g, EdgeValues::zero(&g));
        let mut tracker = MinTracker::build(&g, &fix, &g.empty_edge_set());
        assert!(!tracker.delete(&g, &fix, EdgeId(0)));
        let mut deleted = g.empty_edge_set();
        deleted.set(0, true);
        assert!(min_edges_intact(
            &g,
            &Qastel::from_edge_values(&g, &fix),
            &deleted
        ));
    }

    #[test]
    fn incremental_records_hot_leq_scratch_and_regions_match() {
        let cfg = tiny_cfg();
        let records = bench_incremental(&cfg);
        assert_eq!(records.len(), cfg.instances * cfg.increments);
        let a = incremental_records_to_csv(&records);
        let b = incremental_records_to_csv(&bench_incremental(&cfg));
        assert_eq!(a, b);
        for r in &records {
            assert!(r.regions_equal, "instance {} step {}", r.instance, r.step);
        }
        // Cumulative hot lifts never exceed from-scratch lifts by the end.
        for instance in 0..cfg.instances {
            let last = records
                .iter()
                .rfind(|r| r.instance == instance)
                .unwrap();
            assert!(
                last.hot_cum_lifts <= last.scratch_cum_lifts,
                "instance {instance}: hot {} > scratch {}",
                last.hot_cum_lifts,
                last.scratch_cum_lifts
            );
        }
    }

    #[test]
    fn conflict_records_deterministic_with_oracle_columns() {
        let cfg = tiny_cfg();
        let a = bench_conflict_rounds(&cfg);
        let b = bench_conflict_rounds(&cfg);
        assert_eq!(conflict_records_to_csv(&a), conflict_records_to_csv(&b));
        assert_eq!(a.len(), cfg.instances * cfg.avoidance_fractions.len());
        for r in &a {
            assert!(r.oracle_size.is_some(), "oracle applies at this size");
            assert!(r.winning_size <= r.oracle_size.unwrap());
        }
    }

    #[test]
    fn trivial_stay_has_zero_conflict_rounds() {
        let mut cfg = tiny_cfg();
        cfg.avoidance_fractions = vec![0.0];
        let records = bench_conflict_rounds(&cfg);
        for r in &records {
            assert_eq!(r.rounds, 0);
        }
    }

    #[test]
    fn known_underapproximated_instance_records_one_round_incomplete() {
        // The one-player co-Büchi example where synthesis gives up a node
        // that a positional witness wins: one conflict round, completeness
        // column false.
        use qastel_core::game::{Player, Successor};
        let owners = vec![Player::Zero; 3];
        let succ = vec![
            vec![s(0, -1), s(1, 0)],
            vec![s(0, -1), s(2, 0)],
            vec![s(1, -1), s(2, 0)],
        ];
        fn s(t: u32, w: i64) -> Successor {
            Successor {
                target: NodeId(t),
                weight: w,
            }
        }
        let g = GameGraph::new(owners, succ).unwrap();
        let stay = g.node_set_from([NodeId(0), NodeId(2)]);
        let out = qastel_core::mistel::compute_mistel(&g, stay.clone(), None);
        let oracle = positional_oracle_region(&g, &stay);
        assert_eq!(out.rounds - 1, 1);
        assert_eq!(out.mistel.winning.count_ones(), 2);
        assert_eq!(oracle.count_ones(), 3);
        assert_ne!(oracle, out.mistel.winning);
    }
}
