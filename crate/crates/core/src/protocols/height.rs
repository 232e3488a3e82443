use crate::engine::{NodeProgram, Protocol, Status, Symbol};

use super::echo::EchoCore;
use super::signal::{ALPHABET, ONE, PROBE, TWO};

/// Height search on top of [`EchoCore`].
///
/// Let `P` be the round a node reads its first `1` (the leader's start
/// round at the leader). One round after its echo completes the leader
/// sends `2` to its children; every node forwards the `2` to its children
/// in the round it reads it, and calls that round `S`. Then
/// `D = (S - P - 2) / 2`, and a node at depth `h` halts in round
/// `S + D - h`, the same round `start + 3D + 2` everywhere.
///
/// A node needs its depth. When the search starts in round 0 that is just
/// `P`. A search started later, in a round the other nodes do not know,
/// uses a probe: the leader sends `x` to its children one round after
/// starting, each node passes it on one round after reading it, so a node
/// at depth `h` reads it `h` rounds after its first `1`.
#[derive(Clone, Debug)]
pub(crate) struct HeightCore {
    echo: EchoCore,
    probe: bool,
    depth: Option<u64>,
    forward_probe_at: Option<u64>,
    s_round: Option<u64>,
    d: Option<u64>,
    halt_at: Option<u64>,
    halted: bool,
}

impl HeightCore {
    pub fn new(degree: usize, leader: bool, probe: bool) -> Self {
        HeightCore {
            echo: EchoCore::new(degree, leader),
            probe,
            depth: None,
            forward_probe_at: None,
            s_round: None,
            d: None,
            halt_at: None,
            halted: false,
        }
    }

    pub fn d(&self) -> Option<u64> {
        self.d
    }

    pub fn depth(&self) -> Option<u64> {
        self.depth
    }

    pub fn parent(&self) -> Option<usize> {
        self.echo.parent
    }

    pub fn child_ports(&self) -> Vec<usize> {
        self.echo.child_ports()
    }

    fn fill_children(&self, outbox: &mut [Symbol], symbol: Symbol) {
        for (k, &child) in self.echo.children.iter().enumerate() {
            if child {
                outbox[k] = symbol;
            }
        }
    }

    pub fn step(&mut self, round: u64, inbox: &[Symbol], outbox: &mut [Symbol]) -> Status {
        if self.halted || self.halt_at.is_some_and(|h| round >= h) {
            self.halted = true;
            return Status::Halted;
        }
        let leader = self.echo.leader;
        let Some(p) = self.echo.activated else {
            // Before the first `1` everything else is leftover traffic.
            if !leader && !inbox.contains(&ONE) {
                return Status::Running;
            }
            self.echo.step(round, inbox, outbox, true);
            let p = self.echo.activated.expect("activated on `1` or as leader");
            if leader {
                self.depth = Some(0);
            } else if !self.probe {
                self.depth = Some(p);
            }
            if self.echo.degree() == 0 {
                self.d = Some(0);
                self.halted = true;
                return Status::Halted;
            }
            return Status::Running;
        };

        self.echo.step(round, inbox, outbox, true);
        let parent = self.echo.parent;

        if self.probe {
            if leader && round == p + 1 {
                // All neighbours of the leader are its children.
                outbox.fill(PROBE);
            }
            if let Some(q) = parent {
                if self.depth.is_none() && inbox[q] == PROBE {
                    self.depth = Some(round - p);
                    self.forward_probe_at = Some(round + 1);
                }
            }
            if self.forward_probe_at == Some(round) {
                self.fill_children(outbox, PROBE);
            }
        }

        if self.s_round.is_none() {
            let s = match parent {
                None => self.echo.completed.filter(|&c| c < round).map(|_| round),
                Some(q) => (inbox[q] == TWO).then_some(round),
            };
            if let Some(s) = s {
                self.fill_children(outbox, TWO);
                let twice = s - p - 2;
                debug_assert!(twice % 2 == 0, "S - P - 2 must be even");
                let d = twice / 2;
                let depth = self.depth.expect("depth known before the `2` wave");
                self.s_round = Some(s);
                self.d = Some(d);
                self.halt_at = Some(s + d - depth);
                if self.halt_at == Some(round) {
                    // Only the deepest leaves, which have no children.
                    self.halted = true;
                    return Status::Halted;
                }
            }
        }
        Status::Running
    }
}

/// Standalone height search started by the leader in round 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct HeightSearch;

pub fn height_search() -> HeightSearch {
    HeightSearch
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightOutput {
    pub d: Option<u32>,
    pub depth: Option<u32>,
    pub parent_port: Option<u32>,
    pub child_ports: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct HeightNode {
    core: HeightCore,
}

impl NodeProgram for HeightNode {
    type Output = HeightOutput;

    fn step(&mut self, round: u64, inbox: &[Symbol], outbox: &mut [Symbol]) -> Status {
        self.core.step(round, inbox, outbox)
    }

    fn output(&self) -> HeightOutput {
        HeightOutput {
            d: self.core.d().map(|d| d as u32),
            depth: self.core.depth().map(|d| d as u32),
            parent_port: self.core.parent().map(|p| p as u32),
            child_ports: self.core.child_ports().into_iter().map(|k| k as u32).collect(),
        }
    }
}

impl Protocol for HeightSearch {
    type Node = HeightNode;

    fn name(&self) -> &str {
        "height"
    }

    fn alphabet_size(&self) -> u16 {
        ALPHABET
    }

    fn spawn(&self, degree: usize, is_leader: bool) -> HeightNode {
        HeightNode {
            core: HeightCore::new(degree, is_leader, false),
        }
    }
}
