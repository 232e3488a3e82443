//! Line-oriented graph file format.
//!
//! ```text
//! # comment
//! nodes 4
//! leader 1
//! edge 1 2
//! edge 2 3
//! ```
//!
//! Edges are either all implicit (`edge <u> <v>`, ports assigned in file
//! order) or all explicit (`edge <u> <pu> <v> <pv>`).

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::network::{Configuration, Network, NetworkError, NodeId, PortId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `nodes` line")]
    MissingNodes,
    #[error("line {line}: `nodes` given twice")]
    DuplicateNodes { line: usize },
    #[error("line {line}: `leader` given twice")]
    DuplicateLeader { line: usize },
    #[error("leader {0} is not a node of the graph")]
    LeaderNotFound(u32),
    #[error("line {line}: node {node} is outside 1..={count}")]
    UnknownNode { line: usize, node: u32, count: usize },
    #[error("line {line}: self-loop at node {node}")]
    SelfLoop { line: usize, node: u32 },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: u32, v: u32 },
    #[error("line {line}: implicit and explicit edge forms are mixed")]
    MixedForms { line: usize },
    #[error("line {line}: port {port} of node {node} is already wired")]
    PortConflict { line: usize, node: u32, port: u32 },
    #[error("node {node} has degree {degree} but port {port} is unused")]
    PortGap { node: u32, port: u32, degree: usize },
    #[error("graph is disconnected: node {0} is unreachable")]
    Disconnected(u32),
    #[error("invalid network: {0}")]
    Network(NetworkError),
}

/// Contents of a graph file before a leader default is applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphFile {
    pub network: Network,
    pub leader: Option<NodeId>,
}

enum Form {
    Implicit,
    Explicit,
}

/// Parses a graph file; the leader defaults to node 1 when absent.
pub fn parse_graph(text: &str) -> Result<Configuration, ParseError> {
    let file = parse_graph_file(text)?;
    let leader = file.leader.unwrap_or(NodeId(1));
    Configuration::new(file.network, leader).map_err(ParseError::Network)
}

/// Parses a graph file, keeping the optional `leader` line as written.
pub fn parse_graph_file(text: &str) -> Result<GraphFile, ParseError> {
    let mut count: Option<usize> = None;
    let mut leader: Option<(usize, u32)> = None;
    let mut form: Option<Form> = None;
    let mut implicit: Vec<(usize, u32, u32)> = Vec::new();
    let mut explicit: Vec<(usize, u32, u32, u32, u32)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut words = content.split_whitespace();
        let keyword = words.next().unwrap_or_default();
        let args: Vec<u32> = words
            .map(|w| {
                w.parse::<u32>().map_err(|_| ParseError::Syntax {
                    line,
                    message: format!("expected a non-negative integer, found `{w}`"),
                })
            })
            .collect::<Result<_, _>>()?;
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(ParseError::Syntax {
                    line,
                    message: format!("`{keyword}` takes {n} arguments, found {}", args.len()),
                })
            }
        };
        match keyword {
            "nodes" => {
                arity(1)?;
                if count.is_some() {
                    return Err(ParseError::DuplicateNodes { line });
                }
                if args[0] == 0 {
                    return Err(ParseError::Syntax {
                        line,
                        message: "a graph needs at least one node".into(),
                    });
                }
                count = Some(args[0] as usize);
            }
            "leader" => {
                arity(1)?;
                if leader.is_some() {
                    return Err(ParseError::DuplicateLeader { line });
                }
                leader = Some((line, args[0]));
            }
            "edge" => match args.len() {
                2 => {
                    if matches!(form, Some(Form::Explicit)) {
                        return Err(ParseError::MixedForms { line });
                    }
                    form = Some(Form::Implicit);
                    implicit.push((line, args[0], args[1]));
                }
                4 => {
                    if matches!(form, Some(Form::Implicit)) {
                        return Err(ParseError::MixedForms { line });
                    }
                    form = Some(Form::Explicit);
                    explicit.push((line, args[0], args[1], args[2], args[3]));
                }
                n => {
                    return Err(ParseError::Syntax {
                        line,
                        message: format!("`edge` takes 2 or 4 arguments, found {n}"),
                    })
                }
            },
            other => {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }

    let count = count.ok_or(ParseError::MissingNodes)?;
    let check_node = |line: usize, node: u32| {
        if node == 0 || node as usize > count {
            Err(ParseError::UnknownNode { line, node, count })
        } else {
            Ok(())
        }
    };
    let mut pairs = BTreeSet::new();
    let mut check_pair = |line: usize, u: u32, v: u32| {
        check_node(line, u)?;
        check_node(line, v)?;
        if u == v {
            return Err(ParseError::SelfLoop { line, node: u });
        }
        if !pairs.insert((u.min(v), u.max(v))) {
            return Err(ParseError::DuplicateEdge { line, u: u.min(v), v: u.max(v) });
        }
        Ok(())
    };

    let mut ports: Vec<Vec<Option<(NodeId, PortId)>>> = vec![Vec::new(); count];
    for &(line, u, v) in &implicit {
        check_pair(line, u, v)?;
        let pu = ports[u as usize - 1].len() as u32;
        let pv = ports[v as usize - 1].len() as u32;
        ports[u as usize - 1].push(Some((NodeId(v), PortId(pv))));
        ports[v as usize - 1].push(Some((NodeId(u), PortId(pu))));
    }
    for &(line, u, pu, v, pv) in &explicit {
        check_pair(line, u, v)?;
        for (node, port, peer, peer_port) in [(u, pu, v, pv), (v, pv, u, pu)] {
            let row = &mut ports[node as usize - 1];
            if row.len() <= port as usize {
                row.resize(port as usize + 1, None);
            }
            let slot = &mut row[port as usize];
            if slot.is_some() {
                return Err(ParseError::PortConflict { line, node, port });
            }
            *slot = Some((NodeId(peer), PortId(peer_port)));
        }
    }

    let mut port_map = Vec::with_capacity(count);
    for (i, row) in ports.into_iter().enumerate() {
        let degree = row.len();
        let filled = row
            .into_iter()
            .enumerate()
            .map(|(k, slot)| {
                slot.ok_or(ParseError::PortGap {
                    node: i as u32 + 1,
                    port: k as u32,
                    degree,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        port_map.push(filled);
    }

    let network = Network::from_port_map(port_map).map_err(|e| match e {
        NetworkError::Disconnected(v) => ParseError::Disconnected(v.0),
        other => ParseError::Network(other),
    })?;
    let leader = match leader {
        Some((_, id)) if id == 0 || id as usize > count => return Err(ParseError::LeaderNotFound(id)),
        Some((_, id)) => Some(NodeId(id)),
        None => None,
    };
    Ok(GraphFile { network, leader })
}

/// Writes a configuration in explicit-port form when the port map cannot be
/// reproduced by file order, and in implicit form otherwise.
pub fn write_graph(cfg: &Configuration) -> String {
    let net = &cfg.network;
    let mut out = String::new();
    let _ = writeln!(out, "nodes {}", net.node_count());
    let _ = writeln!(out, "leader {}", cfg.leader);
    let edges = net.edges();
    let implicit = Network::from_edges(
        net.node_count(),
        &edges.iter().map(|&(u, v)| (u.0, v.0)).collect::<Vec<_>>(),
    );
    if implicit.as_ref() == Ok(net) {
        for (u, v) in edges {
            let _ = writeln!(out, "edge {u} {v}");
        }
    } else {
        for v in net.nodes() {
            for (k, &(u, r)) in net.ports_of(v).iter().enumerate() {
                if v < u {
                    let _ = writeln!(out, "edge {v} {k} {u} {r}");
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let cfg = parse_graph("nodes 2\nleader 1\nedge 1 2").unwrap();
        assert_eq!(cfg.network.node_count(), 2);
        assert_eq!(cfg.leader, NodeId(1));
        assert_eq!(
            cfg.network.invert_port(NodeId(1), PortId(0)).unwrap(),
            (NodeId(2), PortId(0))
        );
    }

    #[test]
    fn explicit_ports() {
        let text = "nodes 4\nedge 1 2 2 0\nedge 1 0 3 0\nedge 1 1 4 0\n";
        let cfg = parse_graph(text).unwrap();
        let net = &cfg.network;
        assert_eq!(net.invert_port(NodeId(1), PortId(2)).unwrap(), (NodeId(2), PortId(0)));
        assert_eq!(net.invert_port(NodeId(1), PortId(0)).unwrap(), (NodeId(3), PortId(0)));
        assert_eq!(write_graph(&cfg).lines().filter(|l| l.starts_with("edge")).count(), 3);
        assert_eq!(parse_graph(&write_graph(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn comments_and_default_leader() {
        let cfg = parse_graph("# a path\n\nnodes 3\nedge 1 2\n  # indented\nedge 2 3\n").unwrap();
        assert_eq!(cfg.leader, NodeId(1));
        assert_eq!(cfg.network.edge_count(), 2);
    }

    #[test]
    fn distinct_errors() {
        type Case = (&'static str, fn(&ParseError) -> bool);
        let cases: [Case; 9] = [
            ("nodes 2\nedge 1 2\nedge 1 2", |e| matches!(e, ParseError::DuplicateEdge { line: 3, .. })),
            ("nodes 2\nedge 2 1\nedge 1 2", |e| matches!(e, ParseError::DuplicateEdge { .. })),
            ("nodes 2\nedge 1 1", |e| matches!(e, ParseError::SelfLoop { .. })),
            ("nodes 3\nedge 1 2", |e| matches!(e, ParseError::Disconnected(3))),
            ("nodes 3\nedge 1 0 2 0\nedge 1 0 3 0", |e| matches!(e, ParseError::PortConflict { node: 1, port: 0, .. })),
            ("nodes 2\nedge 1 1 2 0", |e| matches!(e, ParseError::PortGap { node: 1, port: 0, .. })),
            ("nodes 3\nedge 1 2\nedge 2 0 3 0", |e| matches!(e, ParseError::MixedForms { line: 3 })),
            ("nodes 2\nleader 5\nedge 1 2", |e| matches!(e, ParseError::LeaderNotFound(5))),
            ("edge 1 2", |e| matches!(e, ParseError::MissingNodes)),
        ];
        for (text, check) in cases {
            let err = parse_graph(text).unwrap_err();
            assert!(check(&err), "{text:?} gave {err:?}");
        }
    }

    #[test]
    fn parsing_is_deterministic() {
        let text = "nodes 4\nedge 1 3\nedge 3 2\nedge 2 4\nedge 4 1\n";
        assert_eq!(parse_graph(text).unwrap(), parse_graph(text).unwrap());
    }
}
