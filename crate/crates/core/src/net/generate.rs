use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::network::{Configuration, Network, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Path,
    Star,
    Cycle,
    RandomTree,
    RandomConnected,
}

impl GraphKind {
    pub const ALL: [GraphKind; 5] = [
        GraphKind::Path,
        GraphKind::Star,
        GraphKind::Cycle,
        GraphKind::RandomTree,
        GraphKind::RandomConnected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Path => "path",
            GraphKind::Star => "star",
            GraphKind::Cycle => "cycle",
            GraphKind::RandomTree => "random_tree",
            GraphKind::RandomConnected => "random_connected",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GraphKind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.name().replace('_', "-") == s)
            .ok_or_else(|| format!("unknown graph kind `{s}`"))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("a graph needs at least one node")]
    NoNodes,
    #[error("a simple cycle needs at least 3 nodes, got {0}")]
    CycleTooSmall(usize),
    #[error("{requested} extra edges requested but only {available} non-tree pairs exist on {nodes} nodes")]
    TooManyEdges {
        requested: usize,
        available: usize,
        nodes: usize,
    },
    #[error("extra edges are only meaningful for random_connected")]
    ExtraEdgesNotAllowed,
}

/// Deterministic graph generator. Leader is node 1; edges are emitted in
/// sorted `(u, v)` order with `u < v`, so ports follow that order.
pub fn generate(
    kind: GraphKind,
    n: usize,
    extra_edges: usize,
    seed: u64,
) -> Result<Configuration, GenerateError> {
    if n == 0 {
        return Err(GenerateError::NoNodes);
    }
    if extra_edges > 0 && kind != GraphKind::RandomConnected {
        return Err(GenerateError::ExtraEdgesNotAllowed);
    }
    let n32 = n as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    match kind {
        GraphKind::Path => edges.extend((1..n32).map(|i| (i, i + 1))),
        GraphKind::Star => edges.extend((2..=n32).map(|i| (1, i))),
        GraphKind::Cycle => {
            if n < 3 {
                return Err(GenerateError::CycleTooSmall(n));
            }
            edges.extend((1..n32).map(|i| (i, i + 1)));
            edges.insert((1, n32));
        }
        GraphKind::RandomTree => edges.extend(random_tree(n, &mut rng)),
        GraphKind::RandomConnected => {
            let available = n * (n - 1) / 2 - (n - 1);
            if extra_edges > available {
                return Err(GenerateError::TooManyEdges {
                    requested: extra_edges,
                    available,
                    nodes: n,
                });
            }
            edges.extend(random_tree(n, &mut rng));
            add_random_edges(&mut edges, n32, extra_edges, &mut rng);
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    let network = Network::from_edges(n, &edges).expect("generators build simple connected graphs");
    Ok(Configuration::new(network, NodeId(1)).expect("node 1 exists"))
}

/// Random recursive tree on shuffled labels.
fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let mut labels: Vec<u32> = (1..=n as u32).collect();
    labels.shuffle(rng);
    (1..n)
        .map(|i| {
            let j = rng.gen_range(0..i);
            let (a, b) = (labels[i], labels[j]);
            (a.min(b), a.max(b))
        })
        .collect()
}

fn add_random_edges(edges: &mut BTreeSet<(u32, u32)>, n: u32, extra: usize, rng: &mut ChaCha8Rng) {
    let total = n as usize * (n as usize - 1) / 2;
    if extra == 0 {
        return;
    }
    // Rejection sampling while the graph is sparse, enumeration once it is dense.
    if edges.len() + extra <= total / 2 {
        let target = edges.len() + extra;
        while edges.len() < target {
            let a = rng.gen_range(1..=n);
            let b = rng.gen_range(1..=n);
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    } else {
        let mut free: Vec<(u32, u32)> = (1..=n)
            .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
            .filter(|p| !edges.contains(p))
            .collect();
        free.shuffle(rng);
        edges.extend(free.into_iter().take(extra));
    }
}

/// The Petersen graph: 3-regular, 2-edge-connected, diameter 2.
pub fn petersen() -> Configuration {
    let mut edges = Vec::new();
    for i in 0..5u32 {
        edges.push((i + 1, (i + 1) % 5 + 1));
        edges.push((i + 1, i + 6));
        edges.push((i + 6, (i + 2) % 5 + 6));
    }
    let mut edges: Vec<_> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
    edges.sort();
    let network = Network::from_edges(10, &edges).expect("petersen graph is valid");
    Configuration::new(network, NodeId(1)).expect("node 1 exists")
}
