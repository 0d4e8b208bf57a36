//! Text formats: weighted games, PGSolver parity games, objective sidecars.
//!
//! Weighted-game format (line-based, `#` starts a comment):
//!
//! ```text
//! wgame <n>;
//! <id> <owner 0|1> <succ:weight>[,<succ:weight>]* ["name"];
//! ```
//!
//! PGSolver parity format:
//!
//! ```text
//! parity <maxid>;
//! <id> <priority> <owner> <succ>[,<succ>]* ["name"];
//! ```
//!
//! Objective sidecar, one directive per line: `cobuechi-stay: <id list>`,
//! `safety: <id list>`, `credit: <c>`.

use thiserror::Error;

use crate::game::{
    GameGraph, NodeId, ObjectiveSpec, Player, Successor, DEFAULT_MAX_NODES, DEFAULT_MAX_WEIGHT,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: node {node} declared twice")]
    DuplicateNode { line: usize, node: usize },
    #[error("line {line}: node id {node} out of range (n = {n})")]
    NodeOutOfRange { line: usize, node: usize, n: usize },
    #[error("line {line}: successor {target} out of range (n = {n})")]
    DanglingSuccessor { line: usize, target: usize, n: usize },
    #[error("line {line}: weight {weight} exceeds the configured cap {cap}")]
    WeightCap { line: usize, weight: i64, cap: u64 },
    #[error("node count {n} exceeds the configured cap {cap}")]
    NodeCap { n: usize, cap: usize },
    #[error("node {node} has no successors")]
    DeadEnd { node: usize },
    #[error("missing `{header}` header")]
    MissingHeader { header: &'static str },
}

/// Validation limits applied while parsing.
#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub max_nodes: usize,
    pub max_weight: u64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            max_nodes: DEFAULT_MAX_NODES,
            max_weight: DEFAULT_MAX_WEIGHT,
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Splits a statement body into leading whitespace tokens plus an optional
/// trailing quoted name.
fn split_name(body: &str, line: usize) -> Result<(&str, Option<String>), ParseError> {
    let trimmed = body.trim_end();
    if let Some(without) = trimmed.strip_suffix('"') {
        match without.rfind('"') {
            Some(open) => Ok((&without[..open], Some(without[open + 1..].to_string()))),
            None => Err(ParseError::Syntax {
                line,
                message: "unterminated name quote".into(),
            }),
        }
    } else {
        Ok((trimmed, None))
    }
}

struct Statements<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Statements<'a> {
    fn new(text: &'a str) -> Self {
        Statements {
            lines: text.lines().enumerate(),
        }
    }
}

impl<'a> Iterator for Statements<'a> {
    /// (1-based line number, statement body without the trailing `;`)
    type Item = Result<(usize, &'a str), ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        for (idx, raw) in self.lines.by_ref() {
            let line = idx + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            let Some(stripped) = body.strip_suffix(';') else {
                return Some(Err(ParseError::Syntax {
                    line,
                    message: "statement does not end with ';'".into(),
                }));
            };
            return Some(Ok((line, stripped)));
        }
        None
    }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize, ParseError> {
    tok.parse().map_err(|_| ParseError::Syntax {
        line,
        message: format!("expected {what}, found `{tok}`"),
    })
}

fn parse_owner(tok: &str, line: usize) -> Result<Player, ParseError> {
    match tok {
        "0" => Ok(Player::Zero),
        "1" => Ok(Player::One),
        _ => Err(ParseError::Syntax {
            line,
            message: format!("owner must be 0 or 1, found `{tok}`"),
        }),
    }
}

/// Parses the weighted-game format.
pub fn parse_weighted_game(text: &str, opts: &ParseOptions) -> Result<GameGraph, ParseError> {
    let mut stmts = Statements::new(text);
    let (header_line, header) = match stmts.next() {
        Some(r) => r?,
        None => return Err(ParseError::MissingHeader { header: "wgame" }),
    };
    let mut head_tokens = header.split_whitespace();
    if head_tokens.next() != Some("wgame") {
        return Err(ParseError::MissingHeader { header: "wgame" });
    }
    let n = match head_tokens.next() {
        Some(t) => parse_usize(t, header_line, "node count")?,
        None => {
            return Err(ParseError::Syntax {
                line: header_line,
                message: "missing node count".into(),
            })
        }
    };
    if head_tokens.next().is_some() {
        return Err(ParseError::Syntax {
            line: header_line,
            message: "trailing tokens after node count".into(),
        });
    }
    if n > opts.max_nodes {
        return Err(ParseError::NodeCap {
            n,
            cap: opts.max_nodes,
        });
    }

    let mut owners: Vec<Option<Player>> = vec![None; n];
    let mut successors: Vec<Vec<Successor>> = vec![Vec::new(); n];
    let mut names: Vec<Option<String>> = vec![None; n];
    let mut any_name = false;

    for stmt in stmts {
        let (line, body) = stmt?;
        let (head, name) = split_name(body, line)?;
        let mut tokens = head.split_whitespace();
        let id = match tokens.next() {
            Some(t) => parse_usize(t, line, "node id")?,
            None => {
                return Err(ParseError::Syntax {
                    line,
                    message: "empty node line".into(),
                })
            }
        };
        if id >= n {
            return Err(ParseError::NodeOutOfRange { line, node: id, n });
        }
        if owners[id].is_some() {
            return Err(ParseError::DuplicateNode { line, node: id });
        }
        let owner = match tokens.next() {
            Some(t) => parse_owner(t, line)?,
            None => {
                return Err(ParseError::Syntax {
                    line,
                    message: "missing owner".into(),
                })
            }
        };
        let succ_text: String = tokens.collect::<Vec<_>>().join("");
        if succ_text.is_empty() {
            return Err(ParseError::DeadEnd { node: id });
        }
        let mut list = Vec::new();
        for item in succ_text.split(',') {
            let Some((t, w)) = item.split_once(':') else {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("expected `succ:weight`, found `{item}`"),
                });
            };
            let target = parse_usize(t, line, "successor id")?;
            if target >= n {
                return Err(ParseError::DanglingSuccessor {
                    line,
                    target,
                    n,
                });
            }
            let weight: i64 = w.parse().map_err(|_| ParseError::Syntax {
                line,
                message: format!("expected integer weight, found `{w}`"),
            })?;
            if weight.unsigned_abs() > opts.max_weight {
                return Err(ParseError::WeightCap {
                    line,
                    weight,
                    cap: opts.max_weight,
                });
            }
            list.push(Successor {
                target: NodeId(target as u32),
                weight,
            });
        }
        owners[id] = Some(owner);
        successors[id] = list;
        if name.is_some() {
            any_name = true;
        }
        names[id] = name;
    }

    for (id, o) in owners.iter().enumerate() {
        if o.is_none() || successors[id].is_empty() {
            return Err(ParseError::DeadEnd { node: id });
        }
    }
    let owners: Vec<Player> = owners.into_iter().map(|o| o.unwrap()).collect();
    let names = any_name.then_some(names);
    GameGraph::with_labels(owners, successors, None, names).map_err(|e| match e {
        crate::error::GraphError::DeadEnd { node } => ParseError::DeadEnd { node },
        other => ParseError::Syntax {
            line: 0,
            message: other.to_string(),
        },
    })
}

/// Serializes a graph in the weighted-game format; parsing the output yields
/// an identical graph.
pub fn serialize_weighted_game(g: &GameGraph) -> String {
    let mut out = String::new();
    out.push_str(&format!("wgame {};\n", g.node_count()));
    for u in g.nodes() {
        let succ: Vec<String> = g
            .out_edges(u)
            .map(|e| format!("{}:{}", g.target(e).index(), g.weight(e)))
            .collect();
        out.push_str(&format!(
            "{} {} {}",
            u.index(),
            g.owner(u).index(),
            succ.join(",")
        ));
        if let Some(name) = g.name(u) {
            out.push_str(&format!(" \"{name}\""));
        }
        out.push_str(";\n");
    }
    out
}

/// Parses the PGSolver parity format into a graph with priorities and
/// all-zero weights.
pub fn parse_pgsolver_parity(text: &str, opts: &ParseOptions) -> Result<GameGraph, ParseError> {
    let mut stmts = Statements::new(text);
    let (header_line, header) = match stmts.next() {
        Some(r) => r?,
        None => return Err(ParseError::MissingHeader { header: "parity" }),
    };
    let mut head_tokens = header.split_whitespace();
    if head_tokens.next() != Some("parity") {
        return Err(ParseError::MissingHeader { header: "parity" });
    }
    let max_id = match head_tokens.next() {
        Some(t) => parse_usize(t, header_line, "max node id")?,
        None => {
            return Err(ParseError::Syntax {
                line: header_line,
                message: "missing max node id".into(),
            })
        }
    };
    let n = max_id + 1;
    if n > opts.max_nodes {
        return Err(ParseError::NodeCap {
            n,
            cap: opts.max_nodes,
        });
    }

    let mut owners: Vec<Option<Player>> = vec![None; n];
    let mut successors: Vec<Vec<Successor>> = vec![Vec::new(); n];
    let mut priorities: Vec<u64> = vec![0; n];
    let mut names: Vec<Option<String>> = vec![None; n];
    let mut any_name = false;

    for stmt in stmts {
        let (line, body) = stmt?;
        let (head, name) = split_name(body, line)?;
        let mut tokens = head.split_whitespace();
        let id = match tokens.next() {
            Some(t) => parse_usize(t, line, "node id")?,
            None => {
                return Err(ParseError::Syntax {
                    line,
                    message: "empty node line".into(),
                })
            }
        };
        if id >= n {
            return Err(ParseError::NodeOutOfRange { line, node: id, n });
        }
        if owners[id].is_some() {
            return Err(ParseError::DuplicateNode { line, node: id });
        }
        let priority = match tokens.next() {
            Some(t) => parse_usize(t, line, "priority")? as u64,
            None => {
                return Err(ParseError::Syntax {
                    line,
                    message: "missing priority".into(),
                })
            }
        };
        let owner = match tokens.next() {
            Some(t) => parse_owner(t, line)?,
            None => {
                return Err(ParseError::Syntax {
                    line,
                    message: "missing owner".into(),
                })
            }
        };
        let succ_text: String = tokens.collect::<Vec<_>>().join("");
        if succ_text.is_empty() {
            return Err(ParseError::DeadEnd { node: id });
        }
        let mut list = Vec::new();
        for item in succ_text.split(',') {
            let target = parse_usize(item, line, "successor id")?;
            if target >= n {
                return Err(ParseError::DanglingSuccessor {
                    line,
                    target,
                    n,
                });
            }
            list.push(Successor {
                target: NodeId(target as u32),
                weight: 0,
            });
        }
        owners[id] = Some(owner);
        successors[id] = list;
        priorities[id] = priority;
        if name.is_some() {
            any_name = true;
        }
        names[id] = name;
    }

    for (id, o) in owners.iter().enumerate() {
        if o.is_none() {
            return Err(ParseError::DeadEnd { node: id });
        }
    }
    let owners: Vec<Player> = owners.into_iter().map(|o| o.unwrap()).collect();
    let names = any_name.then_some(names);
    GameGraph::with_labels(owners, successors, Some(priorities), names).map_err(|e| match e {
        crate::error::GraphError::DeadEnd { node } => ParseError::DeadEnd { node },
        other => ParseError::Syntax {
            line: 0,
            message: other.to_string(),
        },
    })
}

/// Parses an objective sidecar into a conjunction list.
pub fn parse_objectives(text: &str, g: &GameGraph) -> Result<Vec<ObjectiveSpec>, ParseError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, rest)) = body.split_once(':') else {
            return Err(ParseError::Syntax {
                line,
                message: "expected `<directive>: <args>`".into(),
            });
        };
        let parse_ids = |rest: &str| -> Result<Vec<NodeId>, ParseError> {
            let mut ids = Vec::new();
            for tok in rest.split(|c: char| c.is_whitespace() || c == ',') {
                if tok.is_empty() {
                    continue;
                }
                let id = parse_usize(tok, line, "node id")?;
                if id >= g.node_count() {
                    return Err(ParseError::NodeOutOfRange {
                        line,
                        node: id,
                        n: g.node_count(),
                    });
                }
                ids.push(NodeId(id as u32));
            }
            Ok(ids)
        };
        match key.trim() {
            "cobuechi-stay" => out.push(ObjectiveSpec::CoBuechi {
                stay: parse_ids(rest)?,
            }),
            "safety" => out.push(ObjectiveSpec::Safety {
                region: parse_ids(rest)?,
            }),
            "credit" => {
                let c = parse_usize(rest.trim(), line, "credit")? as u64;
                out.push(ObjectiveSpec::EnergyFixedCredit(c));
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::EdgeId;

    pub(crate) const ENERGY_EXAMPLE: &str = "\
# three-node energy game
wgame 3;
0 0 0:1,0:-2,1:-5 \"a\";
1 0 0:-2,1:1,2:0 \"b\";
2 1 1:0,2:-1 \"c\";
";

    #[test]
    fn parses_energy_example_game() {
        let g = parse_weighted_game(ENERGY_EXAMPLE, &ParseOptions::default()).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 8);
        assert_eq!(g.max_abs_weight(), 5);
        assert_eq!(g.owner(NodeId(2)), Player::One);
        assert_eq!(g.weight(EdgeId(2)), -5);
        assert_eq!(g.name(NodeId(0)), Some("a"));
    }

    #[test]
    fn self_loop_zero_weight_graph() {
        let g = parse_weighted_game("wgame 1;\n0 0 0:0;\n", &ParseOptions::default()).unwrap();
        assert_eq!(g.max_abs_weight(), 0);
        assert_eq!(g.value_cap(), 0);
    }

    #[test]
    fn missing_successors_is_dead_end() {
        let err =
            parse_weighted_game("wgame 2;\n0 0 1:0;\n", &ParseOptions::default()).unwrap_err();
        assert_eq!(err, ParseError::DeadEnd { node: 1 });
    }

    #[test]
    fn dangling_successor_reported_with_line() {
        let err =
            parse_weighted_game("wgame 1;\n0 0 5:0;\n", &ParseOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            ParseError::DanglingSuccessor {
                line: 2,
                target: 5,
                ..
            }
        ));
    }

    #[test]
    fn weight_cap_enforced() {
        let err = parse_weighted_game(
            "wgame 1;\n0 0 0:100001;\n",
            &ParseOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::WeightCap { weight: 100001, .. }));
    }

    #[test]
    fn syntax_error_carries_line_number() {
        let err = parse_weighted_game("wgame 1;\n0 0 0:1\n", &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }));
    }

    #[test]
    fn whitespace_between_tokens_is_flexible() {
        let g = parse_weighted_game(
            "wgame 2;\n0   0   1:2 , 0:-1;\n1 1 0:0;\n",
            &ParseOptions::default(),
        )
        .unwrap();
        assert_eq!(g.out_degree(NodeId(0)), 2);
        assert_eq!(g.weight(EdgeId(0)), 2);
    }

    #[test]
    fn round_trips_energy_example() {
        let g = parse_weighted_game(ENERGY_EXAMPLE, &ParseOptions::default()).unwrap();
        let text = serialize_weighted_game(&g);
        let g2 = parse_weighted_game(&text, &ParseOptions::default()).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn parses_minimal_pgsolver() {
        let g =
            parse_pgsolver_parity("parity 1;\n0 2 0 1;\n1 1 1 0;\n", &ParseOptions::default())
                .unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.priority(NodeId(0)), Some(2));
        assert_eq!(g.owner(NodeId(1)), Player::One);
        assert!(g.edges().all(|e| g.weight(e) == 0));
    }

    #[test]
    fn pgsolver_missing_priority_is_error() {
        let err = parse_pgsolver_parity("parity 0;\n0 0;\n", &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }));
    }

    #[test]
    fn pgsolver_three_node_chain() {
        let g = parse_pgsolver_parity(
            "parity 2;\n0 0 0 1;\n1 1 0 2;\n2 2 1 2;\n",
            &ParseOptions::default(),
        )
        .unwrap();
        let d = g.nodes().filter_map(|u| g.priority(u)).max().unwrap();
        assert_eq!(d, 2);
    }

    #[test]
    fn parses_objective_sidecar() {
        let g = parse_weighted_game(ENERGY_EXAMPLE, &ParseOptions::default()).unwrap();
        let objs = parse_objectives(
            "# sidecar\ncobuechi-stay: 0 2\nsafety: 0,1,2\ncredit: 4\n",
            &g,
        )
        .unwrap();
        assert_eq!(objs.len(), 3);
        assert_eq!(
            objs[0],
            ObjectiveSpec::CoBuechi {
                stay: vec![NodeId(0), NodeId(2)]
            }
        );
        assert_eq!(objs[2], ObjectiveSpec::EnergyFixedCredit(4));
    }

    #[test]
    fn sidecar_rejects_unknown_nodes() {
        let g = parse_weighted_game(ENERGY_EXAMPLE, &ParseOptions::default()).unwrap();
        let err = parse_objectives("cobuechi-stay: 9\n", &g).unwrap_err();
        assert!(matches!(err, ParseError::NodeOutOfRange { node: 9, .. }));
    }

    mod roundtrip {
        use super::*;
        use proptest::prelude::*;

        fn arb_game() -> impl Strategy<Value = GameGraph> {
            (1usize..8).prop_flat_map(|n| {
                let node = (
                    0u8..2,
                    prop::collection::vec((0..n, -9i64..=9), 1..4),
                    prop::option::of("[a-z]{1,6}"),
                );
                prop::collection::vec(node, n..=n).prop_map(move |nodes| {
                    let owners = nodes
                        .iter()
                        .map(|(o, _, _)| Player::from_index(*o).unwrap())
                        .collect();
                    let succ = nodes
                        .iter()
                        .map(|(_, list, _)| {
                            list.iter()
                                .map(|&(t, w)| Successor {
                                    target: NodeId(t as u32),
                                    weight: w,
                                })
                                .collect()
                        })
                        .collect();
                    let names: Vec<Option<String>> =
                        nodes.into_iter().map(|(_, _, name)| name).collect();
                    let names = names.iter().any(Option::is_some).then_some(names);
                    GameGraph::with_labels(owners, succ, None, names).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn serialize_then_parse_is_identity(g in arb_game()) {
                let text = serialize_weighted_game(&g);
                let parsed = parse_weighted_game(&text, &ParseOptions::default()).unwrap();
                prop_assert_eq!(g, parsed);
            }

            #[test]
            fn parsers_never_panic_on_arbitrary_input(text in ".{0,200}") {
                let opts = ParseOptions::default();
                let _ = parse_weighted_game(&text, &opts);
                let _ = parse_pgsolver_parity(&text, &opts);
            }
        }
    }
}
