//! Shared helpers for unit tests: tiny graph builders and seeded random games.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{GameGraph, NodeId, NodeSet, Player, Successor};

/// The three-node energy game used as a running example: nodes a, b owned by
/// Player 0, node c by Player 1; edges e1..e8 in declaration order.
pub const ENERGY_EXAMPLE: &str = "\
wgame 3;
0 0 0:1,0:-2,1:-5 \"a\";
1 0 0:-2,1:1,2:0 \"b\";
2 1 1:0,2:-1 \"c\";
";

/// The three-node one-player mean-payoff co-Büchi example: all nodes owned by
/// Player 0; stay region {a, c}; edges (a,a):-1, (a,b):0, (b,a):-1, (b,c):0,
/// (c,b):-1, (c,c):0.
pub const COBUECHI_EXAMPLE: &str = "\
wgame 3;
0 0 0:-1,1:0 \"a\";
1 0 0:-1,2:0 \"b\";
2 0 1:-1,2:0 \"c\";
";

pub fn game(owners: &[u8], succ: &[&[(u32, i64)]]) -> GameGraph {
    let owners = owners
        .iter()
        .map(|&o| Player::from_index(o).unwrap())
        .collect();
    let succ = succ
        .iter()
        .map(|l| {
            l.iter()
                .map(|&(t, w)| Successor {
                    target: NodeId(t),
                    weight: w,
                })
                .collect()
        })
        .collect();
    GameGraph::new(owners, succ).unwrap()
}

pub fn set_of(g: &GameGraph, ids: &[u32]) -> NodeSet {
    g.node_set_from(ids.iter().map(|&i| NodeId(i)))
}

/// Seeded random game: every node gets one uniform successor, then extra
/// edges are added to reach the requested average degree. Owners uniform,
/// weights uniform in `[-max_weight; max_weight]`.
pub fn random_game(seed: u64, n: usize, avg_degree: f64, max_weight: i64) -> GameGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let owners: Vec<Player> = (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                Player::Zero
            } else {
                Player::One
            }
        })
        .collect();
    let mut succ: Vec<Vec<Successor>> = (0..n)
        .map(|_| {
            vec![Successor {
                target: NodeId(rng.random_range(0..n) as u32),
                weight: rng.random_range(-max_weight..=max_weight),
            }]
        })
        .collect();
    let extra = ((avg_degree - 1.0).max(0.0) * n as f64).round() as usize;
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        succ[u].push(Successor {
            target: NodeId(rng.random_range(0..n) as u32),
            weight: rng.random_range(-max_weight..=max_weight),
        });
    }
    GameGraph::new(owners, succ).unwrap()
}

/// All positional Player-0 strategies of `g`, as edge choices per Player-0
/// node. Intended for exhaustive checks on small games.
pub fn all_positional_strategies(g: &GameGraph) -> Vec<crate::qastel::PositionalStrategy> {
    let p0: Vec<NodeId> = g
        .nodes()
        .filter(|&u| g.owner(u) == Player::Zero)
        .collect();
    let mut out = Vec::new();
    let mut picks: Vec<usize> = vec![0; p0.len()];
    loop {
        let mut strat = crate::qastel::PositionalStrategy::empty(g);
        for (i, &u) in p0.iter().enumerate() {
            let e = g.out_edges(u).nth(picks[i]).unwrap();
            strat.set(u, e);
        }
        out.push(strat);
        // Odometer increment over the per-node out-degrees.
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
