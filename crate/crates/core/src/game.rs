//! Immutable two-player weighted game graphs.
//!
//! Nodes carry dense ids `0..n-1` and an owner tag. Each node stores an
//! ordered successor list; global edge ids are assigned in node order, so the
//! k-th edge of node `u` keeps a stable id across the lifetime of the graph.

use bitvec::prelude::*;

use crate::error::GraphError;

/// Node-count validation limit (from the benchmark setup).
pub const DEFAULT_MAX_NODES: usize = 500_000;
/// Weight-magnitude validation limit (from the benchmark setup).
pub const DEFAULT_MAX_WEIGHT: u64 = 100_000;

/// Set of nodes, indexed by node id.
pub type NodeSet = BitVec<usize, Lsb0>;
/// Set of edges, indexed by global edge id.
pub type EdgeSet = BitVec<usize, Lsb0>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    Zero,
    One,
}

impl Player {
    pub fn from_index(i: u8) -> Option<Player> {
        match i {
            0 => Some(Player::Zero),
            1 => Some(Player::One),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Player::Zero => 0,
            Player::One => 1,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::Zero => Player::One,
            Player::One => Player::Zero,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeId(pub u32);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One outgoing edge as supplied to the graph constructor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Successor {
    pub target: NodeId,
    pub weight: i64,
}

/// An immutable weighted game graph.
///
/// Construction validates totality (every node has a successor), target
/// bounds, and that `max_abs_weight` is the maximum weight magnitude present.
/// The graph is safe to share across threads once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameGraph {
    owners: Vec<Player>,
    // CSR layout: edges of node u are edge_first[u]..edge_first[u+1].
    edge_first: Vec<u32>,
    edge_source: Vec<u32>,
    edge_target: Vec<u32>,
    edge_weight: Vec<i64>,
    // Incoming edge ids per node, used by the worklist engine.
    in_first: Vec<u32>,
    in_edges: Vec<u32>,
    max_abs_weight: u64,
    priorities: Option<Vec<u64>>,
    names: Option<Vec<Option<String>>>,
}

impl GameGraph {
    /// Builds a graph from per-node successor lists.
    pub fn new(
        owners: Vec<Player>,
        successors: Vec<Vec<Successor>>,
    ) -> Result<GameGraph, GraphError> {
        GameGraph::with_labels(owners, successors, None, None)
    }

    pub fn with_labels(
        owners: Vec<Player>,
        successors: Vec<Vec<Successor>>,
        priorities: Option<Vec<u64>>,
        names: Option<Vec<Option<String>>>,
    ) -> Result<GameGraph, GraphError> {
        let n = owners.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if successors.len() != n {
            return Err(GraphError::LengthMismatch {
                nodes: n,
                lists: successors.len(),
            });
        }
        if let Some(p) = &priorities {
            if p.len() != n {
                return Err(GraphError::LengthMismatch {
                    nodes: n,
                    lists: p.len(),
                });
            }
        }
        let mut edge_first = Vec::with_capacity(n + 1);
        let mut edge_source = Vec::new();
        let mut edge_target = Vec::new();
        let mut edge_weight = Vec::new();
        let mut max_abs = 0u64;
        edge_first.push(0);
        for (u, list) in successors.iter().enumerate() {
            if list.is_empty() {
                return Err(GraphError::DeadEnd { node: u });
            }
            for s in list {
                if s.target.index() >= n {
                    return Err(GraphError::DanglingSuccessor {
                        node: u,
                        target: s.target.index(),
                    });
                }
                edge_source.push(u as u32);
                edge_target.push(s.target.0);
                edge_weight.push(s.weight);
                max_abs = max_abs.max(s.weight.unsigned_abs());
            }
            edge_first.push(edge_source.len() as u32);
        }

        // Transposed adjacency: edge ids grouped by target.
        let m = edge_source.len();
        let mut in_count = vec![0u32; n];
        for &t in &edge_target {
            in_count[t as usize] += 1;
        }
        let mut in_first = Vec::with_capacity(n + 1);
        in_first.push(0u32);
        for &count in &in_count {
            let prev = *in_first.last().unwrap();
            in_first.push(prev + count);
        }
        let mut cursor: Vec<u32> = in_first[..n].to_vec();
        let mut in_edges = vec![0u32; m];
        for (e, &t) in edge_target.iter().enumerate() {
            in_edges[cursor[t as usize] as usize] = e as u32;
            cursor[t as usize] += 1;
        }

        Ok(GameGraph {
            owners,
            edge_first,
            edge_source,
            edge_target,
            edge_weight,
            in_first,
            in_edges,
            max_abs_weight: max_abs,
            priorities,
            names,
        })
    }

    pub fn node_count(&self) -> usize {
        self.owners.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_source.len()
    }

    pub fn owner(&self, u: NodeId) -> Player {
        self.owners[u.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count() as u32).map(NodeId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edge_count() as u32).map(EdgeId)
    }

    pub fn source(&self, e: EdgeId) -> NodeId {
        NodeId(self.edge_source[e.index()])
    }

    pub fn target(&self, e: EdgeId) -> NodeId {
        NodeId(self.edge_target[e.index()])
    }

    pub fn weight(&self, e: EdgeId) -> i64 {
        self.edge_weight[e.index()]
    }

    /// Outgoing edge ids of `u`, in successor-list order.
    pub fn out_edges(&self, u: NodeId) -> impl Iterator<Item = EdgeId> + '_ {
        let lo = self.edge_first[u.index()];
        let hi = self.edge_first[u.index() + 1];
        (lo..hi).map(EdgeId)
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        (self.edge_first[u.index() + 1] - self.edge_first[u.index()]) as usize
    }

    /// Ids of edges whose target is `u`.
    pub fn in_edges(&self, u: NodeId) -> impl Iterator<Item = EdgeId> + '_ {
        let lo = self.in_first[u.index()] as usize;
        let hi = self.in_first[u.index() + 1] as usize;
        self.in_edges[lo..hi].iter().map(|&e| EdgeId(e))
    }

    /// Maximum weight magnitude `W` present in the graph (0 when unweighted).
    pub fn max_abs_weight(&self) -> u64 {
        self.max_abs_weight
    }

    /// Value saturation bound `|V| * W` for this graph.
    pub fn value_cap(&self) -> u64 {
        self.node_count() as u64 * self.max_abs_weight
    }

    pub fn priority(&self, u: NodeId) -> Option<u64> {
        self.priorities.as_ref().map(|p| p[u.index()])
    }

    pub fn has_priorities(&self) -> bool {
        self.priorities.is_some()
    }

    pub fn name(&self, u: NodeId) -> Option<&str> {
        self.names
            .as_ref()
            .and_then(|ns| ns[u.index()].as_deref())
    }

    pub fn names(&self) -> Option<&[Option<String>]> {
        self.names.as_deref()
    }

    pub fn is_player0_edge(&self, e: EdgeId) -> bool {
        self.owner(self.source(e)) == Player::Zero
    }

    /// Player-0 edges, in edge-id order.
    pub fn player0_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges().filter(|&e| self.is_player0_edge(e))
    }

    pub fn player0_edge_count(&self) -> usize {
        self.player0_edges().count()
    }

    pub fn empty_node_set(&self) -> NodeSet {
        bitvec![usize, Lsb0; 0; self.node_count()]
    }

    pub fn full_node_set(&self) -> NodeSet {
        bitvec![usize, Lsb0; 1; self.node_count()]
    }

    pub fn empty_edge_set(&self) -> EdgeSet {
        bitvec![usize, Lsb0; 0; self.edge_count()]
    }

    pub fn node_set_from(&self, ids: impl IntoIterator<Item = NodeId>) -> NodeSet {
        let mut s = self.empty_node_set();
        for id in ids {
            s.set(id.index(), true);
        }
        s
    }
}

/// Rewrites a parity-labelled graph into a mean-payoff graph: edge `(u, v)`
/// gets weight `sign(Ω(u)) * n^Ω(u)` with `+1` for even and `-1` for odd
/// priorities, where `n = |V|`. Priorities are cleared in the result.
///
/// Rejected when some weight magnitude would exceed `max_weight`.
pub fn parity_to_mean_payoff(g: &GameGraph, max_weight: u64) -> Result<GameGraph, GraphError> {
    if !g.has_priorities() {
        return Err(GraphError::MissingPriorities);
    }
    let n = g.node_count() as u64;
    let mut successors: Vec<Vec<Successor>> = Vec::with_capacity(g.node_count());
    for u in g.nodes() {
        let p = g.priority(u).expect("priorities checked above");
        let mut magnitude: u64 = 1;
        for _ in 0..p {
            magnitude = magnitude
                .checked_mul(n)
                .filter(|&m| m <= max_weight)
                .ok_or(GraphError::WeightCapExceeded {
                    node: u.index(),
                    priority: p,
                    cap: max_weight,
                })?;
        }
        if magnitude > max_weight {
            return Err(GraphError::WeightCapExceeded {
                node: u.index(),
                priority: p,
                cap: max_weight,
            });
        }
        let w = if p.is_multiple_of(2) {
            magnitude as i64
        } else {
            -(magnitude as i64)
        };
        successors.push(
            g.out_edges(u)
                .map(|e| Successor {
                    target: g.target(e),
                    weight: w,
                })
                .collect(),
        );
    }
    let owners = g.nodes().map(|u| g.owner(u)).collect();
    let names = g.names().map(|ns| ns.to_vec());
    GameGraph::with_labels(owners, successors, None, names)
}

/// Objective descriptions attached to a game; conjunctions are lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObjectiveSpec {
    EnergyUnknownCredit,
    EnergyFixedCredit(u64),
    MeanPayoff,
    /// Eventually remain inside `stay` forever.
    CoBuechi { stay: Vec<NodeId> },
    /// Never leave `region`.
    Safety { region: Vec<NodeId> },
}

/// A finite play prefix: a start node plus the edges taken, in order.
///
/// Storing edges (not just nodes) keeps the running weight well defined in
/// the presence of parallel edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayPrefix {
    start: NodeId,
    edges: Vec<EdgeId>,
}

impl PlayPrefix {
    pub fn new(g: &GameGraph, start: NodeId, edges: Vec<EdgeId>) -> Result<PlayPrefix, GraphError> {
        if start.index() >= g.node_count() {
            return Err(GraphError::UnknownNode { node: start.index() });
        }
        let mut at = start;
        for (i, &e) in edges.iter().enumerate() {
            if e.index() >= g.edge_count() || g.source(e) != at {
                return Err(GraphError::InvalidPrefix { step: i });
            }
            at = g.target(e);
        }
        Ok(PlayPrefix { start, edges })
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// The visited nodes, of length `len() + 1`.
    pub fn nodes(&self, g: &GameGraph) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        out.push(self.start);
        for &e in &self.edges {
            out.push(g.target(e));
        }
        out
    }

    /// Running weights `w(ρ[0;i])` for every position, starting at 0.
    pub fn running_weights(&self, g: &GameGraph) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        let mut acc = 0i64;
        out.push(acc);
        for &e in &self.edges {
            acc += g.weight(e);
            out.push(acc);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn simple(owners: &[u8], succ: &[&[(u32, i64)]]) -> GameGraph {
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

    #[test]
    fn computes_max_abs_weight() {
        let g = simple(&[0, 1], &[&[(1, -5)], &[(0, 3)]]);
        assert_eq!(g.max_abs_weight(), 5);
        assert_eq!(g.value_cap(), 10);
    }

    #[test]
    fn rejects_dead_end() {
        let owners = vec![Player::Zero, Player::One];
        let succ = vec![
            vec![Successor {
                target: NodeId(1),
                weight: 0,
            }],
            vec![],
        ];
        assert!(matches!(
            GameGraph::new(owners, succ),
            Err(GraphError::DeadEnd { node: 1 })
        ));
    }

    #[test]
    fn rejects_dangling_successor() {
        let owners = vec![Player::Zero];
        let succ = vec![vec![Successor {
            target: NodeId(3),
            weight: 0,
        }]];
        assert!(matches!(
            GameGraph::new(owners, succ),
            Err(GraphError::DanglingSuccessor { node: 0, target: 3 })
        ));
    }

    #[test]
    fn edge_ids_follow_successor_order() {
        let g = simple(&[0, 0], &[&[(0, 1), (1, 2)], &[(0, 3)]]);
        let e: Vec<_> = g.out_edges(NodeId(0)).collect();
        assert_eq!(e, vec![EdgeId(0), EdgeId(1)]);
        assert_eq!(g.weight(EdgeId(2)), 3);
        assert_eq!(g.source(EdgeId(2)), NodeId(1));
        let incoming: Vec<_> = g.in_edges(NodeId(0)).collect();
        assert_eq!(incoming, vec![EdgeId(0), EdgeId(2)]);
    }

    #[test]
    fn parity_translation_two_nodes() {
        // Priorities {0, 1} on a 2-node cycle: weights +1 and -2.
        let owners = vec![Player::Zero, Player::One];
        let succ = vec![
            vec![Successor {
                target: NodeId(1),
                weight: 0,
            }],
            vec![Successor {
                target: NodeId(0),
                weight: 0,
            }],
        ];
        let g = GameGraph::with_labels(owners, succ, Some(vec![0, 1]), None).unwrap();
        let mp = parity_to_mean_payoff(&g, DEFAULT_MAX_WEIGHT).unwrap();
        assert_eq!(mp.weight(EdgeId(0)), 1);
        assert_eq!(mp.weight(EdgeId(1)), -2);
        assert!(!mp.has_priorities());
        assert_eq!(mp.node_count(), g.node_count());
        assert_eq!(mp.owner(NodeId(1)), Player::One);
    }

    #[test]
    fn parity_translation_all_even_zero() {
        let owners = vec![Player::Zero, Player::Zero];
        let succ = vec![
            vec![Successor {
                target: NodeId(1),
                weight: 0,
            }],
            vec![Successor {
                target: NodeId(0),
                weight: 0,
            }],
        ];
        let g = GameGraph::with_labels(owners, succ, Some(vec![0, 0]), None).unwrap();
        let mp = parity_to_mean_payoff(&g, DEFAULT_MAX_WEIGHT).unwrap();
        assert!(mp.edges().all(|e| mp.weight(e) == 1));
    }

    #[test]
    fn parity_translation_rejects_cap_overflow() {
        // n = 10, priority 6: magnitude 10^6 exceeds the default cap 10^5.
        let owners = vec![Player::Zero; 10];
        let succ: Vec<Vec<Successor>> = (0..10)
            .map(|u| {
                vec![Successor {
                    target: NodeId(((u + 1) % 10) as u32),
                    weight: 0,
                }]
            })
            .collect();
        let mut prios = vec![0u64; 10];
        prios[3] = 6;
        let g = GameGraph::with_labels(owners, succ, Some(prios), None).unwrap();
        let err = parity_to_mean_payoff(&g, DEFAULT_MAX_WEIGHT).unwrap_err();
        match err {
            GraphError::WeightCapExceeded { priority, .. } => assert_eq!(priority, 6),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn graphs_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<GameGraph>();
    }

    #[test]
    fn play_prefix_validates_connectivity() {
        let g = simple(&[0, 0], &[&[(1, 2)], &[(0, -1)]]);
        let p = PlayPrefix::new(&g, NodeId(0), vec![EdgeId(0), EdgeId(1)]).unwrap();
        assert_eq!(p.nodes(&g), vec![NodeId(0), NodeId(1), NodeId(0)]);
        assert_eq!(p.running_weights(&g), vec![0, 2, 1]);
        assert!(PlayPrefix::new(&g, NodeId(0), vec![EdgeId(1)]).is_err());
    }
}
