//! Seeded random game generation for the benchmark harness.

use qastel_core::game::{GameGraph, NodeId, Player, Successor};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generates a random game: every node draws one uniform successor (so the
/// graph is total), then extra edges are added until the average out-degree
/// reaches `avg_degree`. Owners are uniform, weights uniform in
/// `[-max_weight; max_weight]`. Identical seeds yield identical graphs.
pub fn generate_random_game(seed: u64, n: usize, avg_degree: f64, max_weight: i64) -> GameGraph {
    assert!(n >= 1, "games need at least one node");
    assert!(avg_degree >= 1.0, "average degree below 1 breaks totality");
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
    let mut successors: Vec<Vec<Successor>> = (0..n)
        .map(|_| {
            vec![Successor {
                target: NodeId(rng.random_range(0..n) as u32),
                weight: rng.random_range(-max_weight..=max_weight),
            }]
        })
        .collect();
    let extra = ((avg_degree - 1.0) * n as f64).round() as usize;
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        successors[u].push(Successor {
            target: NodeId(rng.random_range(0..n) as u32),
            weight: rng.random_range(-max_weight..=max_weight),
        });
    }
    GameGraph::new(owners, successors).expect("generated games are total by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_graph() {
        let a = generate_random_game(11, 40, 2.5, 3);
        let b = generate_random_game(11, 40, 2.5, 3);
        assert_eq!(a, b);
        let c = generate_random_game(12, 40, 2.5, 3);
        assert_ne!(a, c);
    }

    #[test]
    fn single_node_gets_a_self_loop() {
        let g = generate_random_game(5, 1, 1.0, 2);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.out_degree(NodeId(0)), 1);
        assert_eq!(g.target(qastel_core::EdgeId(0)), NodeId(0));
    }

    #[test]
    fn degree_one_yields_functional_graph() {
        let g = generate_random_game(9, 25, 1.0, 2);
        assert!(g.nodes().all(|u| g.out_degree(u) == 1));
    }

    #[test]
    fn average_degree_is_respected() {
        let g = generate_random_game(3, 200, 3.0, 2);
        let avg = g.edge_count() as f64 / g.node_count() as f64;
        assert!((avg - 3.0).abs() < 0.01);
    }
}
