//! Port-numbered networks with a distinguished leader.
//!
//! A [`Network`] is an undirected simple connected graph in which every node
//! numbers its incident edges locally with ports `0..deg(v)`. The port map
//! pairs each endpoint `(v, k)` with the opposite endpoint; it is an
//! involution without fixed points. Nodes never see [`NodeId`]s, only their
//! own degree and ports.

mod format;
mod generate;
mod network;

pub use format::{parse_graph, parse_graph_file, write_graph, GraphFile, ParseError};
pub use generate::{generate, petersen, GenerateError, GraphKind};
pub use network::{Configuration, Network, NetworkError, NodeId, PortId};
