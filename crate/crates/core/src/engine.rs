//! Lockstep simulator.
//!
//! In round `t` every node reads the symbols its neighbours put on the
//! shared edges in round `t - 1` (all empty in round 0) and puts one symbol
//! on each of its own ports. A node reports [`Status::Halted`] from the
//! first round in which it will stay silent forever; the engine keeps
//! calling halted nodes and records any later emission as a violation.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::net::{Configuration, NodeId};

/// A channel symbol. `0` is the empty symbol λ in every alphabet.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u16);

impl Symbol {
    pub const EMPTY: Symbol = Symbol(0);

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Packs a pair from a product alphabet as `first * second_size + second`.
    pub fn pair(first: Symbol, second: Symbol, second_size: u16) -> Symbol {
        debug_assert!(second.0 < second_size);
        Symbol(first.0 * second_size + second.0)
    }

    pub fn split(self, second_size: u16) -> (Symbol, Symbol) {
        (Symbol(self.0 / second_size), Symbol(self.0 % second_size))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    Halted,
}

/// State machine run by one node. `inbox` and `outbox` have one slot per
/// port; the outbox arrives filled with λ. `round` counts from 0 at the
/// node's start.
pub trait NodeProgram {
    type Output: Clone + fmt::Debug + PartialEq;

    fn step(&mut self, round: u64, inbox: &[Symbol], outbox: &mut [Symbol]) -> Status;

    /// What the node can report from its current state.
    fn output(&self) -> Self::Output;
}

/// A uniform protocol: every node runs the same program, parameterized
/// only by its degree and whether it is the leader.
pub trait Protocol {
    type Node: NodeProgram;

    fn name(&self) -> &str;

    /// Number of distinct symbols, λ included.
    fn alphabet_size(&self) -> u16;

    fn spawn(&self, degree: usize, is_leader: bool) -> Self::Node;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrafficStats {
    /// Non-empty transmissions over all rounds, nodes and ports.
    pub total: u64,
    pub per_round: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Receive { round: u64, node: NodeId, port: u32, symbol: Symbol },
    Send { round: u64, node: NodeId, port: u32, symbol: Symbol },
    Halt { node: NodeId, round: u64 },
}

/// Every non-empty symbol read or written, plus halt events, in round order
/// and node order within a round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub node_count: usize,
    pub protocol: String,
    pub outputs: Vec<String>,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    /// Text form: header `trace v=<V> protocol=<name>`, then `output` lines,
    /// then one line per event.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "trace v={} protocol={}", self.node_count, self.protocol);
        for line in &self.outputs {
            let _ = writeln!(out, "output {line}");
        }
        for e in &self.events {
            let _ = match e {
                TraceEvent::Receive { round, node, port, symbol } => {
                    writeln!(out, "{round} {node} {port} in {symbol}")
                }
                TraceEvent::Send { round, node, port, symbol } => {
                    writeln!(out, "{round} {node} {port} out {symbol}")
                }
                TraceEvent::Halt { node, round } => writeln!(out, "halt {node} {round}"),
            };
        }
        out
    }
}

/// A node misbehaving after its halt round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub node: NodeId,
    pub round: u64,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("{halted} of {node_count} nodes halted within {max_rounds} rounds")]
    Timeout {
        max_rounds: u64,
        halted: usize,
        node_count: usize,
        trace: Option<Box<Trace>>,
    },
    #[error("evaluation order is not a permutation of the nodes")]
    BadOrder,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// The run fails if some node is still running after this many rounds.
    pub max_rounds: u64,
    pub record_trace: bool,
    /// Node evaluation order within a round; results never depend on it.
    pub order: Option<Vec<NodeId>>,
}

impl RunOptions {
    pub fn default_max_rounds(node_count: usize) -> u64 {
        64 * node_count as u64 + 256
    }

    pub fn for_config(cfg: &Configuration) -> Self {
        RunOptions {
            max_rounds: Self::default_max_rounds(cfg.network.node_count()),
            record_trace: false,
            order: None,
        }
    }

    pub fn traced(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn with_max_rounds(mut self, max_rounds: u64) -> Self {
        self.max_rounds = max_rounds;
        self
    }
}

/// A simulation in progress.
pub struct Simulation<'a, P: Protocol> {
    cfg: &'a Configuration,
    protocol_name: String,
    alphabet_size: u16,
    nodes: Vec<P::Node>,
    outgoing: Vec<Vec<Symbol>>,
    round: u64,
    halt_rounds: Vec<Option<u64>>,
    violations: Vec<Violation>,
    traffic: TrafficStats,
    trace: Option<Trace>,
    order: Vec<usize>,
}

impl<'a, P: Protocol> Simulation<'a, P> {
    pub fn new(cfg: &'a Configuration, protocol: &P, options: &RunOptions) -> Result<Self, EngineError> {
        let net = &cfg.network;
        let n = net.node_count();
        let order = match &options.order {
            None => (0..n).collect(),
            Some(order) => {
                let mut seen = vec![false; n];
                for v in order {
                    if v.0 == 0 || v.index() >= n || std::mem::replace(&mut seen[v.index()], true) {
                        return Err(EngineError::BadOrder);
                    }
                }
                if seen.iter().any(|s| !s) {
                    return Err(EngineError::BadOrder);
                }
                order.iter().map(|v| v.index()).collect()
            }
        };
        Ok(Simulation {
            cfg,
            protocol_name: protocol.name().to_string(),
            alphabet_size: protocol.alphabet_size(),
            nodes: net
                .nodes()
                .map(|v| protocol.spawn(net.degree(v), cfg.is_leader(v)))
                .collect(),
            outgoing: net.nodes().map(|v| vec![Symbol::EMPTY; net.degree(v)]).collect(),
            round: 0,
            halt_rounds: vec![None; n],
            violations: Vec::new(),
            traffic: TrafficStats {
                total: 0,
                per_round: Vec::new(),
            },
            trace: options.record_trace.then(|| Trace {
                node_count: n,
                protocol: protocol.name().to_string(),
                outputs: Vec::new(),
                events: Vec::new(),
            }),
            order,
        })
    }

    /// Index of the next round to execute.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn all_halted(&self) -> bool {
        self.halt_rounds.iter().all(Option::is_some)
    }

    pub fn nodes(&self) -> &[P::Node] {
        &self.nodes
    }

    /// Symbols written in the last executed round, per node and port.
    pub fn last_outgoing(&self) -> &[Vec<Symbol>] {
        &self.outgoing
    }

    /// Executes one round.
    pub fn step(&mut self) {
        let net = &self.cfg.network;
        let round = self.round;
        let inboxes: Vec<Vec<Symbol>> = (0..self.nodes.len())
            .map(|v| {
                (0..self.outgoing[v].len())
                    .map(|k| {
                        let (u, r) = net.peer(v, k);
                        self.outgoing[u][r]
                    })
                    .collect()
            })
            .collect();
        let mut next: Vec<Vec<Symbol>> = self.outgoing.iter().map(|o| vec![Symbol::EMPTY; o.len()]).collect();
        let mut statuses = vec![Status::Running; self.nodes.len()];
        for &v in &self.order {
            statuses[v] = self.nodes[v].step(round, &inboxes[v], &mut next[v]);
        }

        let mut sent = 0;
        for v in 0..self.nodes.len() {
            let node = NodeId::from_index(v);
            let silent = next[v].iter().all(|s| s.is_empty());
            sent += next[v].iter().filter(|s| !s.is_empty()).count() as u64;
            match self.halt_rounds[v] {
                None if statuses[v] == Status::Halted => {
                    self.halt_rounds[v] = Some(round);
                    if !silent {
                        self.violations.push(Violation { node, round });
                    }
                }
                Some(_) if statuses[v] == Status::Running || !silent => {
                    self.violations.push(Violation { node, round });
                }
                _ => {}
            }
            if let Some(trace) = &mut self.trace {
                for (k, &symbol) in inboxes[v].iter().enumerate() {
                    if !symbol.is_empty() {
                        trace.events.push(TraceEvent::Receive { round, node, port: k as u32, symbol });
                    }
                }
                for (k, &symbol) in next[v].iter().enumerate() {
                    if !symbol.is_empty() {
                        trace.events.push(TraceEvent::Send { round, node, port: k as u32, symbol });
                    }
                }
                if self.halt_rounds[v] == Some(round) {
                    trace.events.push(TraceEvent::Halt { node, round });
                }
            }
        }
        self.traffic.total += sent;
        self.traffic.per_round.push(sent);
        self.outgoing = next;
        self.round += 1;
    }

    /// Steps until every node has halted or `max_rounds` rounds have run.
    pub fn run(mut self, max_rounds: u64) -> Result<Run<P::Node>, EngineError> {
        while !self.all_halted() {
            if self.round >= max_rounds {
                return Err(EngineError::Timeout {
                    max_rounds,
                    halted: self.halt_rounds.iter().filter(|h| h.is_some()).count(),
                    node_count: self.nodes.len(),
                    trace: self.trace.map(Box::new),
                });
            }
            self.step();
        }
        let halt_rounds: Vec<u64> = self.halt_rounds.iter().map(|h| h.expect("all halted")).collect();
        Ok(Run {
            protocol: self.protocol_name,
            alphabet_size: self.alphabet_size,
            degrees: self.cfg.network.nodes().map(|v| self.cfg.network.degree(v)).collect(),
            rounds: halt_rounds.iter().copied().max().unwrap_or(0),
            halt_rounds,
            nodes: self.nodes,
            traffic: self.traffic,
            trace: self.trace,
            violations: self.violations,
        })
    }
}

/// Runs `protocol` on `cfg` until every node halts.
pub fn run_until_halt<P: Protocol>(
    cfg: &Configuration,
    protocol: &P,
    options: &RunOptions,
) -> Result<Run<P::Node>, EngineError> {
    Simulation::new(cfg, protocol, options)?.run(options.max_rounds)
}

/// A finished run.
pub struct Run<N: NodeProgram> {
    pub protocol: String,
    alphabet_size: u16,
    degrees: Vec<usize>,
    nodes: Vec<N>,
    halt_rounds: Vec<u64>,
    rounds: u64,
    traffic: TrafficStats,
    trace: Option<Trace>,
    violations: Vec<Violation>,
}

/// Result of [`audit`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Audit {
    pub simultaneous: bool,
    pub silent_after_halt: bool,
    pub violations: Vec<Violation>,
}

impl Audit {
    pub fn passed(&self) -> bool {
        self.simultaneous && self.silent_after_halt && self.violations.is_empty()
    }
}

impl<N: NodeProgram> Run<N> {
    pub fn outputs(&self) -> Vec<N::Output> {
        self.nodes.iter().map(NodeProgram::output).collect()
    }

    pub fn output(&self, v: NodeId) -> N::Output {
        self.nodes[v.index()].output()
    }

    /// Round by which every node has halted.
    pub fn execution_time(&self) -> u64 {
        self.rounds
    }

    pub fn halt_rounds(&self) -> &[u64] {
        &self.halt_rounds
    }

    pub fn traffic(&self) -> &TrafficStats {
        &self.traffic
    }

    pub fn trace(&self) -> Option<&Trace> {
        self.trace.as_ref()
    }

    pub fn trace_mut(&mut self) -> Option<&mut Trace> {
        self.trace.as_mut()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// Mutable access to node states, for fault-injection tests.
    pub fn nodes_mut(&mut self) -> &mut [N] {
        &mut self.nodes
    }
}

/// Checks strong termination: every node halted in the same round, and for
/// `slack` further rounds every node stays silent and halted whatever it
/// is fed. Inputs are drawn from the protocol's alphabet with `seed`.
pub fn audit<N: NodeProgram>(run: &mut Run<N>, slack: u64, seed: u64) -> Audit {
    let simultaneous = run.halt_rounds.windows(2).all(|w| w[0] == w[1]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = run.violations.clone();
    let mut silent = true;
    for extra in 1..=slack {
        let round = run.rounds + extra;
        for (v, node) in run.nodes.iter_mut().enumerate() {
            let degree = run.degrees[v];
            let inbox: Vec<Symbol> = (0..degree)
                .map(|_| Symbol(rng.gen_range(0..run.alphabet_size)))
                .collect();
            let mut outbox = vec![Symbol::EMPTY; degree];
            let status = node.step(round, &inbox, &mut outbox);
            if status != Status::Halted || outbox.iter().any(|s| !s.is_empty()) {
                silent = false;
                violations.push(Violation {
                    node: NodeId::from_index(v),
                    round,
                });
            }
        }
    }
    Audit {
        simultaneous,
        silent_after_halt: silent,
        violations,
    }
}

/// Boolean form of [`audit`].
pub fn audit_strong_termination<N: NodeProgram>(run: &mut Run<N>, slack: u64) -> bool {
    audit(run, slack, 0x5eed).passed()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{generate, GraphKind, Network};

    /// Halts every node at a fixed round; the leader sends `1` on port 0 in
    /// round 0.
    struct Scripted {
        halt_at: u64,
        late_node_halt: Option<u64>,
    }

    struct ScriptedNode {
        leader: bool,
        halt_at: u64,
        received: Vec<Symbol>,
        halted: bool,
    }

    impl NodeProgram for ScriptedNode {
        type Output = Vec<Symbol>;
        fn step(&mut self, round: u64, inbox: &[Symbol], outbox: &mut [Symbol]) -> Status {
            if self.halted {
                return Status::Halted;
            }
            self.received.extend(inbox.iter().filter(|s| !s.is_empty()));
            if round >= self.halt_at {
                self.halted = true;
                return Status::Halted;
            }
            if self.leader && round == 0 && !outbox.is_empty() {
                outbox[0] = Symbol(1);
            }
            Status::Running
        }
        fn output(&self) -> Vec<Symbol> {
            self.received.clone()
        }
    }

    impl Protocol for Scripted {
        type Node = ScriptedNode;
        fn name(&self) -> &str {
            "scripted"
        }
        fn alphabet_size(&self) -> u16 {
            2
        }
        fn spawn(&self, _degree: usize, is_leader: bool) -> ScriptedNode {
            ScriptedNode {
                leader: is_leader,
                halt_at: match (is_leader, self.late_node_halt) {
                    (false, Some(late)) => late,
                    _ => self.halt_at,
                },
                received: Vec::new(),
                halted: false,
            }
        }
    }

    fn two_nodes() -> Configuration {
        Configuration::new(Network::from_edges(2, &[(1, 2)]).unwrap(), NodeId(1)).unwrap()
    }

    #[test]
    fn immediate_halt() {
        let cfg = generate(GraphKind::Cycle, 5, 0, 0).unwrap();
        let mut run = run_until_halt(&cfg, &Scripted { halt_at: 0, late_node_halt: None }, &RunOptions::for_config(&cfg)).unwrap();
        assert_eq!(run.execution_time(), 0);
        assert_eq!(run.traffic().total, 0);
        assert!(audit_strong_termination(&mut run, 4));
    }

    #[test]
    fn delivery_next_round() {
        let cfg = two_nodes();
        let opts = RunOptions::for_config(&cfg).traced();
        let run = run_until_halt(&cfg, &Scripted { halt_at: 2, late_node_halt: None }, &opts).unwrap();
        assert_eq!(run.output(NodeId(2)), vec![Symbol(1)]);
        assert_eq!(run.traffic().total, 1);
        let text = run.trace().unwrap().render();
        assert!(text.starts_with("trace v=2 protocol=scripted\n"));
        assert!(text.contains("0 1 0 out 1\n"));
        assert!(text.contains("1 2 0 in 1\n"));
        assert!(text.contains("halt 2 2\n"));
    }

    #[test]
    fn late_halt_fails_audit() {
        let cfg = two_nodes();
        let proto = Scripted { halt_at: 2, late_node_halt: Some(3) };
        let mut run = run_until_halt(&cfg, &proto, &RunOptions::for_config(&cfg)).unwrap();
        assert_eq!(run.halt_rounds(), &[2, 3]);
        assert!(!audit_strong_termination(&mut run, 4));
    }

    #[test]
    fn timeout_reports_progress() {
        let cfg = two_nodes();
        let proto = Scripted { halt_at: 10, late_node_halt: None };
        let err = run_until_halt(&cfg, &proto, &RunOptions::for_config(&cfg).with_max_rounds(3).traced())
            .err()
            .unwrap();
        match err {
            EngineError::Timeout { max_rounds: 3, halted: 0, node_count: 2, trace: Some(t) } => {
                assert!(!t.events.is_empty())
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn order_must_be_permutation() {
        let cfg = two_nodes();
        let mut opts = RunOptions::for_config(&cfg);
        opts.order = Some(vec![NodeId(1), NodeId(1)]);
        assert!(matches!(
            Simulation::new(&cfg, &Scripted { halt_at: 0, late_node_halt: None }, &opts),
            Err(EngineError::BadOrder)
        ));
    }

    #[test]
    fn product_symbols() {
        let s = Symbol::pair(Symbol(3), Symbol(4), 6);
        assert_eq!(s, Symbol(22));
        assert_eq!(s.split(6), (Symbol(3), Symbol(4)));
        assert_eq!(Symbol::pair(Symbol::EMPTY, Symbol::EMPTY, 6), Symbol::EMPTY);
    }
}
