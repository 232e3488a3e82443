use crate::engine::{NodeProgram, Protocol, Status, Symbol};

use super::signal::{ALPHABET, ONE, PARENT, ZERO};

/// Echo state machine, reusable inside other protocols.
///
/// A node activates on the first round it may and has read a `1` (the
/// leader activates unconditionally). On activation it takes the lowest
/// port that delivered a `1` as parent and sends `p` there, `0` on every
/// other port that delivered a `1`, and `1` on the remaining ports. A `1`
/// read later is answered with `0` at once. A non-parent port is resolved
/// once a `0` or `1` has been read on it; children announce themselves with
/// `p` and resolve with their final `0`. When all non-parent ports are
/// resolved the node sends `0` to its parent, or, at the leader, the echo
/// is complete.
#[derive(Clone, Debug)]
pub(crate) struct EchoCore {
    pub leader: bool,
    pub parent: Option<usize>,
    pub activated: Option<u64>,
    pub children: Vec<bool>,
    pub sent_up: Option<u64>,
    pub completed: Option<u64>,
    heard_one: Vec<bool>,
    resolved: Vec<bool>,
    unresolved: usize,
}

impl EchoCore {
    pub fn new(degree: usize, leader: bool) -> Self {
        EchoCore {
            leader,
            parent: None,
            activated: None,
            children: vec![false; degree],
            sent_up: None,
            completed: None,
            heard_one: vec![false; degree],
            resolved: vec![false; degree],
            unresolved: degree,
        }
    }

    pub fn degree(&self) -> usize {
        self.children.len()
    }

    /// Sent its final `0`, or completed at the leader.
    pub fn done(&self) -> bool {
        self.sent_up.is_some() || self.completed.is_some()
    }

    pub fn child_ports(&self) -> Vec<usize> {
        (0..self.degree()).filter(|&k| self.children[k]).collect()
    }

    fn resolve(&mut self, k: usize) {
        if !std::mem::replace(&mut self.resolved[k], true) {
            self.unresolved -= 1;
        }
    }

    /// One round. `may_activate` gates activation; `1`s read before it are
    /// remembered and answered on activation.
    pub fn step(&mut self, round: u64, inbox: &[Symbol], outbox: &mut [Symbol], may_activate: bool) {
        if self.done() {
            return;
        }
        if self.activated.is_none() {
            for (k, &s) in inbox.iter().enumerate() {
                if s == ONE {
                    self.heard_one[k] = true;
                }
            }
            if may_activate {
                self.activate(round, outbox);
            }
            return;
        }
        for (k, &s) in inbox.iter().enumerate() {
            if Some(k) == self.parent {
                continue;
            }
            match s {
                ONE => {
                    outbox[k] = ZERO;
                    self.resolve(k);
                }
                ZERO => self.resolve(k),
                PARENT => self.children[k] = true,
                _ => {}
            }
        }
        if self.unresolved == 0 {
            match self.parent {
                None => self.completed = Some(round),
                Some(p) => {
                    outbox[p] = ZERO;
                    self.sent_up = Some(round);
                }
            }
        }
    }

    fn activate(&mut self, round: u64, outbox: &mut [Symbol]) {
        if self.leader {
            self.activated = Some(round);
            if self.degree() == 0 {
                self.completed = Some(round);
            }
            outbox.fill(ONE);
            return;
        }
        let Some(parent) = self.heard_one.iter().position(|&h| h) else {
            return;
        };
        self.activated = Some(round);
        self.parent = Some(parent);
        self.resolved[parent] = true;
        self.unresolved -= 1;
        #[allow(clippy::needless_range_loop)]
        for k in 0..self.degree() {
            outbox[k] = if k == parent {
                PARENT
            } else if self.heard_one[k] {
                self.resolve(k);
                ZERO
            } else {
                ONE
            };
        }
    }
}

/// The bare echo protocol. The leader halts on completion, every other
/// node one round after sending its final `0`; halting is therefore local
/// and in general not simultaneous.
#[derive(Clone, Copy, Debug, Default)]
pub struct Echo;

pub fn echo() -> Echo {
    Echo
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EchoOutput {
    pub parent_port: Option<u32>,
    pub child_ports: Vec<u32>,
    /// Completion round, at the leader only.
    pub completed_at: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct EchoNode {
    core: EchoCore,
    halted: bool,
}

impl NodeProgram for EchoNode {
    type Output = EchoOutput;

    fn step(&mut self, round: u64, inbox: &[Symbol], outbox: &mut [Symbol]) -> Status {
        if self.halted {
            return Status::Halted;
        }
        if self.core.sent_up.is_some_and(|s| s < round) {
            self.halted = true;
            return Status::Halted;
        }
        self.core.step(round, inbox, outbox, true);
        if self.core.completed.is_some() {
            self.halted = true;
            return Status::Halted;
        }
        Status::Running
    }

    fn output(&self) -> EchoOutput {
        EchoOutput {
            parent_port: self.core.parent.map(|p| p as u32),
            child_ports: self.core.child_ports().into_iter().map(|k| k as u32).collect(),
            completed_at: self.core.completed,
        }
    }
}

impl Protocol for Echo {
    type Node = EchoNode;

    fn name(&self) -> &str {
        "echo"
    }

    fn alphabet_size(&self) -> u16 {
        ALPHABET
    }

    fn spawn(&self, degree: usize, is_leader: bool) -> EchoNode {
        EchoNode {
            core: EchoCore::new(degree, is_leader),
            halted: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{audit_strong_termination, run_until_halt, RunOptions};
    use crate::net::{generate, GraphKind, NodeId};
    use crate::oracle;
    use crate::protocols::echo_completion_round;

    fn leader_completion(kind: GraphKind, n: usize, seed: u64) -> (u64, u64) {
        let cfg = generate(kind, n, 0, seed).unwrap();
        let run = run_until_halt(&cfg, &echo(), &RunOptions::for_config(&cfg)).unwrap();
        let done = run.output(cfg.leader).completed_at.unwrap();
        (done, oracle::height(&cfg) as u64)
    }

    #[test]
    fn two_nodes_complete_at_three() {
        assert_eq!(leader_completion(GraphKind::Path, 2, 0), (3, 1));
    }

    #[test]
    fn completion_matches_formula() {
        for kind in [GraphKind::Path, GraphKind::Star, GraphKind::Cycle, GraphKind::RandomTree] {
            for n in [3, 5, 12] {
                let (done, d) = leader_completion(kind, n, n as u64);
                assert_eq!(done, echo_completion_round(d), "{kind} {n}");
            }
        }
    }

    #[test]
    fn single_node_completes_immediately() {
        assert_eq!(leader_completion(GraphKind::Path, 1, 0), (0, 0));
    }

    #[test]
    fn builds_a_spanning_tree() {
        let cfg = generate(GraphKind::RandomConnected, 20, 15, 4).unwrap();
        let run = run_until_halt(&cfg, &echo(), &RunOptions::for_config(&cfg)).unwrap();
        let tree = oracle::bfs_tree(&cfg);
        for v in cfg.network.nodes() {
            let out = run.output(v);
            let parent = out
                .parent_port
                .map(|p| cfg.network.ports_of(v)[p as usize].0);
            assert_eq!(parent, tree.parent(v));
            let mut children: Vec<NodeId> = out
                .child_ports
                .iter()
                .map(|&p| cfg.network.ports_of(v)[p as usize].0)
                .collect();
            children.sort();
            let mut expected = tree.children(v).to_vec();
            expected.sort();
            assert_eq!(children, expected);
        }
    }

    #[test]
    fn path_of_three_halts_unevenly() {
        let cfg = generate(GraphKind::Path, 3, 0, 0).unwrap();
        let mut run = run_until_halt(&cfg, &echo(), &RunOptions::for_config(&cfg)).unwrap();
        assert_eq!(run.halt_rounds(), &[5, 5, 4]);
        assert!(!audit_strong_termination(&mut run, 12));
    }
}
