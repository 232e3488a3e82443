use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A node of the network, numbered `1..=V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    /// Zero-based position of the node in per-node vectors.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        NodeId(index as u32 + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A local port of a node, numbered `0..deg(v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortId(pub u32);

impl PortId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("network must have at least one node")]
    Empty,
    #[error("node {0} is outside 1..={1}")]
    UnknownNode(u32, usize),
    #[error("port {port} of node {node} is outside 0..{degree}")]
    InvalidPort { node: NodeId, port: PortId, degree: usize },
    #[error("port map is not an involution at ({0}, {1})")]
    NotInvolution(NodeId, PortId),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("network is disconnected: node {0} unreachable from node 1")]
    Disconnected(NodeId),
    #[error("leader {0} is not a node of the network")]
    BadLeader(NodeId),
}

/// Immutable port-numbered network.
///
/// `ports[v][k]` is the endpoint `(u, k')` wired to port `k` of node `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    ports: Vec<Vec<(NodeId, PortId)>>,
    edge_count: usize,
}

impl Network {
    /// Builds a network from an explicit port map and checks every invariant:
    /// involution, no fixed points, simplicity and connectivity.
    pub fn from_port_map(ports: Vec<Vec<(NodeId, PortId)>>) -> Result<Self, NetworkError> {
        if ports.is_empty() {
            return Err(NetworkError::Empty);
        }
        let n = ports.len();
        let mut half_edges = 0usize;
        for (vi, row) in ports.iter().enumerate() {
            let v = NodeId::from_index(vi);
            let mut seen = BTreeSet::new();
            for (k, &(u, r)) in row.iter().enumerate() {
                let k = PortId(k as u32);
                if u.0 == 0 || u.index() >= n {
                    return Err(NetworkError::UnknownNode(u.0, n));
                }
                let back = ports[u.index()].get(r.index()).ok_or(NetworkError::InvalidPort {
                    node: u,
                    port: r,
                    degree: ports[u.index()].len(),
                })?;
                if *back != (v, k) {
                    return Err(NetworkError::NotInvolution(v, k));
                }
                if u == v {
                    return Err(NetworkError::SelfLoop(v));
                }
                if !seen.insert(u) {
                    return Err(NetworkError::DuplicateEdge(v.min(u), v.max(u)));
                }
                half_edges += 1;
            }
        }
        let net = Network {
            ports,
            edge_count: half_edges / 2,
        };
        if let Some(missing) = net.first_unreachable() {
            return Err(NetworkError::Disconnected(missing));
        }
        Ok(net)
    }

    /// Builds a network from an edge list, assigning ports in list order:
    /// the i-th edge touching `v` gets port `i` at `v`.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)]) -> Result<Self, NetworkError> {
        if node_count == 0 {
            return Err(NetworkError::Empty);
        }
        let mut ports: Vec<Vec<(NodeId, PortId)>> = vec![Vec::new(); node_count];
        for &(a, b) in edges {
            for x in [a, b] {
                if x == 0 || x as usize > node_count {
                    return Err(NetworkError::UnknownNode(x, node_count));
                }
            }
            if a == b {
                return Err(NetworkError::SelfLoop(NodeId(a)));
            }
            let (va, vb) = (NodeId(a), NodeId(b));
            let pa = PortId(ports[va.index()].len() as u32);
            let pb = PortId(ports[vb.index()].len() as u32);
            ports[va.index()].push((vb, pb));
            ports[vb.index()].push((va, pa));
        }
        Network::from_port_map(ports)
    }

    pub fn node_count(&self) -> usize {
        self.ports.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.ports[v.index()].len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.ports.len()).map(NodeId::from_index)
    }

    /// The endpoint on the other side of port `k` of node `v`.
    pub fn invert_port(&self, v: NodeId, k: PortId) -> Result<(NodeId, PortId), NetworkError> {
        if v.0 == 0 || v.index() >= self.ports.len() {
            return Err(NetworkError::UnknownNode(v.0, self.ports.len()));
        }
        self.ports[v.index()]
            .get(k.index())
            .copied()
            .ok_or(NetworkError::InvalidPort {
                node: v,
                port: k,
                degree: self.degree(v),
            })
    }

    /// Unchecked variant used on hot paths; indices are zero-based.
    pub(crate) fn peer(&self, v: usize, k: usize) -> (usize, usize) {
        let (u, r) = self.ports[v][k];
        (u.index(), r.index())
    }

    /// Neighbours of `v` in port order.
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.ports[v.index()].iter().map(|&(u, _)| u)
    }

    /// Port-map row of `v`.
    pub fn ports_of(&self, v: NodeId) -> &[(NodeId, PortId)] {
        &self.ports[v.index()]
    }

    /// Every edge once, as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out: Vec<_> = self
            .nodes()
            .flat_map(|v| self.neighbors(v).filter(move |&u| v < u).map(move |u| (v, u)))
            .collect();
        out.sort();
        out
    }

    fn first_unreachable(&self) -> Option<NodeId> {
        let mut seen = vec![false; self.ports.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(u, _) in &self.ports[v] {
                if !seen[u.index()] {
                    seen[u.index()] = true;
                    stack.push(u.index());
                }
            }
        }
        seen.iter().position(|s| !s).map(NodeId::from_index)
    }
}

/// A network together with its leader. The leader is the only node whose
/// initial state differs from the others.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub network: Network,
    pub leader: NodeId,
}

impl Configuration {
    pub fn new(network: Network, leader: NodeId) -> Result<Self, NetworkError> {
        if leader.0 == 0 || leader.index() >= network.node_count() {
            return Err(NetworkError::BadLeader(leader));
        }
        Ok(Configuration { network, leader })
    }

    pub fn with_leader(&self, leader: NodeId) -> Result<Self, NetworkError> {
        Configuration::new(self.network.clone(), leader)
    }

    pub fn is_leader(&self, v: NodeId) -> bool {
        v == self.leader
    }
}
