use crate::certify::{decode_bridges, Certificate, ONE, TWO};
use crate::engine::{NodeProgram, Protocol, Status, Symbol};
use crate::net::{Configuration, NodeId};
use crate::oracle::BridgeSet;

use super::bridges::{BridgeFlags, BridgeSearch};
use super::exchange::Exchange;
use super::height::HeightCore;
use super::signal::ALPHABET as CONTROL;
use super::sync::Synced;
use super::tree::TreeStreams;
use super::wire;

/// Stages of the bridge pipeline, in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    /// Height search: BFS tree, depth and `D`.
    Height,
    /// Node certificates and numbers.
    Numerate,
    /// Neighbour numbers.
    Exchange,
    /// Bridge flags of tree edges.
    Bridges,
    /// Bridge certificate, known to every node.
    Distribute,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Height,
        Stage::Numerate,
        Stage::Exchange,
        Stage::Bridges,
        Stage::Distribute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Height => "height",
            Stage::Numerate => "numerate",
            Stage::Exchange => "exchange",
            Stage::Bridges => "bridges",
            Stage::Distribute => "distribute",
        }
    }

    fn next(self) -> Option<Stage> {
        Stage::ALL.get(self as usize + 1).copied()
    }
}

/// Runs the stages up to and including `upto`. Every stage after the
/// height search is sync-wrapped, so all nodes leave each stage, and enter
/// the next, in the same round; a new stage starts with an empty inbox in
/// the round the previous one halts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pipeline {
    upto: Stage,
}

impl Pipeline {
    pub fn upto(upto: Stage) -> Self {
        Pipeline { upto }
    }

    pub fn last_stage(&self) -> Stage {
        self.upto
    }
}

/// Tree numeration: every node learns its number and node certificate.
pub fn numerate() -> Pipeline {
    Pipeline::upto(Stage::Numerate)
}

/// Numeration followed by the exchange of neighbour numbers.
pub fn exchange_numbers() -> Pipeline {
    Pipeline::upto(Stage::Exchange)
}

/// Every node learns which of its tree edges are bridges.
pub fn find_bridges() -> Pipeline {
    Pipeline::upto(Stage::Bridges)
}

/// Every node learns the whole bridge set.
pub fn distribute_bridges() -> Pipeline {
    Pipeline::upto(Stage::Distribute)
}

/// The full pipeline; same as [`distribute_bridges`].
pub fn pipeline() -> Pipeline {
    distribute_bridges()
}

impl Protocol for Pipeline {
    type Node = PipelineNode;

    fn name(&self) -> &str {
        match self.upto {
            Stage::Height => "height",
            Stage::Numerate => "numerate",
            Stage::Exchange => "exchange",
            Stage::Bridges => "bridges",
            Stage::Distribute => "pipeline",
        }
    }

    fn alphabet_size(&self) -> u16 {
        CONTROL * wire::ALPHABET.max(Exchange::ALPHABET).max(BridgeSearch::ALPHABET)
    }

    fn spawn(&self, degree: usize, is_leader: bool) -> PipelineNode {
        PipelineNode {
            upto: self.upto,
            degree,
            leader: is_leader,
            running: Some(Running::Height(HeightCore::new(degree, is_leader, false))),
            stage_start: 0,
            out: PipelineOutput::default(),
            halted: false,
            blank: vec![Symbol::EMPTY; degree],
        }
    }
}

/// What a node knows after the stages it ran.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PipelineOutput {
    pub d: Option<u32>,
    pub depth: Option<u32>,
    pub parent_port: Option<u32>,
    pub child_ports: Vec<u32>,
    pub number: Option<u32>,
    pub certificate: Option<Certificate>,
    /// Number behind each port.
    pub neighbours: Vec<u32>,
    pub bridge_flags: Option<BridgeFlags>,
    /// Bridges as `(parent number, child number)`.
    pub bridges: Option<Vec<(u32, u32)>>,
    /// Round in which each stage halted.
    pub stage_ends: Vec<(Stage, u64)>,
}

#[derive(Clone, Debug)]
enum Running {
    Height(HeightCore),
    Numerate(Synced<TreeStreams>),
    Exchange(Synced<Exchange>),
    Bridges(Synced<BridgeSearch>),
    Distribute(Synced<TreeStreams>),
}

impl Running {
    fn stage(&self) -> Stage {
        match self {
            Running::Height(_) => Stage::Height,
            Running::Numerate(_) => Stage::Numerate,
            Running::Exchange(_) => Stage::Exchange,
            Running::Bridges(_) => Stage::Bridges,
            Running::Distribute(_) => Stage::Distribute,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineNode {
    upto: Stage,
    degree: usize,
    leader: bool,
    running: Option<Running>,
    stage_start: u64,
    out: PipelineOutput,
    halted: bool,
    blank: Vec<Symbol>,
}

impl PipelineNode {
    fn parent(&self) -> Option<usize> {
        self.out.parent_port.map(|p| p as usize)
    }

    fn children(&self) -> Vec<usize> {
        self.out.child_ports.iter().map(|&k| k as usize).collect()
    }

    fn certificate(&self) -> &Certificate {
        self.out.certificate.as_ref().expect("numeration finished")
    }

    fn number(&self) -> u32 {
        self.out.number.expect("numeration finished")
    }

    /// Records the results of the stage that just halted.
    fn collect(&mut self, running: &Running) {
        match running {
            Running::Height(core) => {
                self.out.d = core.d().map(|d| d as u32);
                self.out.depth = core.depth().map(|d| d as u32);
                self.out.parent_port = core.parent().map(|p| p as u32);
                self.out.child_ports = core.child_ports().into_iter().map(|k| k as u32).collect();
            }
            Running::Numerate(s) => {
                let (number, certificate) = s.output();
                self.out.number = number;
                self.out.certificate = certificate;
            }
            Running::Exchange(s) => self.out.neighbours = s.output(),
            Running::Bridges(s) => self.out.bridge_flags = Some(s.output()),
            Running::Distribute(s) => {
                let cert = s.output().1.expect("bridge certificate complete");
                self.out.bridges = Some(decode_bridges(&cert).expect("valid bridge certificate"));
            }
        }
    }

    fn spawn_stage(&self, stage: Stage) -> Running {
        let wrap = |inner| Synced::new(inner, self.degree, self.leader);
        match stage {
            Stage::Height => Running::Height(HeightCore::new(self.degree, self.leader, false)),
            Stage::Numerate => Running::Numerate(wrap(TreeStreams::numerate(self.parent(), self.children()))),
            Stage::Exchange => Running::Exchange(Synced::new(
                Exchange::new(self.number(), self.certificate().node_count(), self.degree),
                self.degree,
                self.leader,
            )),
            Stage::Bridges => Running::Bridges(Synced::new(
                BridgeSearch::new(
                    self.certificate(),
                    self.number(),
                    &self.out.neighbours,
                    self.parent(),
                    self.children(),
                ),
                self.degree,
                self.leader,
            )),
            Stage::Distribute => {
                let flags = self.out.bridge_flags.as_ref().expect("bridge search finished");
                let marks: Vec<u8> = flags
                    .children
                    .iter()
                    .map(|f| if *f == Some(true) { TWO } else { ONE })
                    .collect();
                Running::Distribute(wrap(TreeStreams::broadcast(self.parent(), self.children(), &marks)))
            }
        }
    }
}

impl NodeProgram for PipelineNode {
    type Output = PipelineOutput;

    fn step(&mut self, round: u64, inbox: &[Symbol], outbox: &mut [Symbol]) -> Status {
        if self.halted {
            return Status::Halted;
        }
        loop {
            let local = round - self.stage_start;
            let input = if local == 0 { &self.blank[..] } else { inbox };
            let running = self.running.as_mut().expect("running until halted");
            let status = match running {
                Running::Height(c) => c.step(local, input, outbox),
                Running::Numerate(s) => s.step(local, input, outbox),
                Running::Exchange(s) => s.step(local, input, outbox),
                Running::Bridges(s) => s.step(local, input, outbox),
                Running::Distribute(s) => s.step(local, input, outbox),
            };
            if status == Status::Running {
                return Status::Running;
            }
            debug_assert!(outbox.iter().all(|s| s.is_empty()), "halting stage stays silent");
            let finished = self.running.take().expect("stage present");
            let stage = finished.stage();
            self.collect(&finished);
            self.out.stage_ends.push((stage, round));
            match stage.next().filter(|_| stage < self.upto) {
                None => {
                    self.halted = true;
                    return Status::Halted;
                }
                Some(next) => {
                    self.running = Some(self.spawn_stage(next));
                    self.stage_start = round;
                }
            }
        }
    }

    fn output(&self) -> PipelineOutput {
        self.out.clone()
    }
}

/// Node id of every number, from the nodes' reported numbers.
fn ids_by_number(outputs: &[PipelineOutput]) -> Option<Vec<NodeId>> {
    let mut ids = vec![None; outputs.len() + 1];
    for (i, out) in outputs.iter().enumerate() {
        let n = out.number? as usize;
        if n == 0 || n > outputs.len() || ids[n].is_some() {
            return None;
        }
        ids[n] = Some(NodeId::from_index(i));
    }
    ids.into_iter().skip(1).collect()
}

fn ordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

/// Bridge set distributed to node `v`, translated to node ids. `None` if
/// the run did not reach distribution or numbers are inconsistent.
pub fn distributed_bridges(outputs: &[PipelineOutput], v: NodeId) -> Option<BridgeSet> {
    let ids = ids_by_number(outputs)?;
    let id = |n: u32| ids.get((n as usize).checked_sub(1)?).copied();
    outputs[v.index()]
        .bridges
        .as_ref()?
        .iter()
        .map(|&(a, b)| Some(ordered(id(a)?, id(b)?)))
        .collect()
}

/// Tree edges that nodes flagged as bridges towards their parent.
pub fn flagged_bridges(cfg: &Configuration, outputs: &[PipelineOutput]) -> Option<BridgeSet> {
    let mut set = BridgeSet::new();
    for (i, out) in outputs.iter().enumerate() {
        let v = NodeId::from_index(i);
        let Some(port) = out.parent_port else { continue };
        if out.bridge_flags.as_ref()?.parent? {
            let (u, _) = cfg.network.ports_of(v)[port as usize];
            set.insert(ordered(u, v));
        }
    }
    Some(set)
}
