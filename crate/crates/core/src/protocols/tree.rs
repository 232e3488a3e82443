use crate::certify::{Certificate, NodeCertificateStream, PrefixStream, SubtreeAssembler};
use crate::engine::{NodeProgram, Status, Symbol};

use super::wire;

#[derive(Clone, Debug)]
enum Downward {
    /// Each node receives its own node certificate and derives its
    /// children's.
    NodeCertificates(NodeCertificateStream),
    /// Every node receives the same certificate.
    Broadcast(PrefixStream),
}

impl Downward {
    fn prefix(&self) -> &PrefixStream {
        match self {
            Downward::NodeCertificates(s) => s.prefix(),
            Downward::Broadcast(s) => s,
        }
    }

    fn push(&mut self, c: u8) {
        let pushed = match self {
            Downward::NodeCertificates(s) => s.push(c),
            Downward::Broadcast(s) => s.push(c),
        };
        pushed.expect("downward stream carries a valid certificate");
    }

    fn child_symbol(&self, pos: usize, k: usize) -> Option<u8> {
        match self {
            Downward::NodeCertificates(s) => s
                .child_symbol(pos, k)
                .expect("child index within own block"),
            Downward::Broadcast(s) => s.symbols().get(pos).copied(),
        }
    }
}

/// Convergecast of a tree certificate followed by its broadcast, pipelined.
///
/// Upward, every node streams the certificate of its subtree to its
/// parent, one symbol per round, as fast as its children's streams allow.
/// The root's subtree certificate is the whole certificate; it flows back
/// down at one symbol per round per edge. A node halts once it has sent its
/// whole upward stream, holds the complete downward certificate and has
/// passed all of it on to every child.
#[derive(Clone, Debug)]
pub struct TreeStreams {
    parent: Option<usize>,
    children: Vec<usize>,
    up: SubtreeAssembler,
    up_sent: usize,
    down: Downward,
    down_sent: Vec<usize>,
    halted: bool,
}

impl TreeStreams {
    /// Numeration: plain marks, each node ends up with its own node
    /// certificate. `children` are ports in the tree's child order.
    pub fn numerate(parent: Option<usize>, children: Vec<usize>) -> Self {
        let up = SubtreeAssembler::with_children(children.len());
        let down = Downward::NodeCertificates(NodeCertificateStream::new(parent.is_none()));
        Self::new(parent, children, up, down)
    }

    /// Distribution of a certificate whose marks the nodes choose: `marks`
    /// holds one `1` or `2` per child. Every node ends up with the full
    /// certificate.
    pub fn broadcast(parent: Option<usize>, children: Vec<usize>, marks: &[u8]) -> Self {
        assert_eq!(marks.len(), children.len(), "one mark per child");
        let up = SubtreeAssembler::new(marks).expect("marks are 1 or 2");
        Self::new(parent, children, up, Downward::Broadcast(PrefixStream::new()))
    }

    fn new(parent: Option<usize>, children: Vec<usize>, up: SubtreeAssembler, down: Downward) -> Self {
        let down_sent = vec![0; children.len()];
        TreeStreams {
            parent,
            children,
            up,
            up_sent: 0,
            down,
            down_sent,
            halted: false,
        }
    }

    /// Own node number, once known (numeration only).
    pub fn number(&self) -> Option<u32> {
        match &self.down {
            Downward::NodeCertificates(s) => s.number(),
            Downward::Broadcast(_) => None,
        }
    }

    /// The downward certificate, once complete.
    pub fn certificate(&self) -> Option<Certificate> {
        let prefix = self.down.prefix();
        prefix
            .is_complete()
            .then(|| prefix.clone().into_certificate().expect("complete"))
    }

    fn finished(&self) -> bool {
        let out = self.up.output();
        let up_done = self.parent.is_none() || (out.is_complete() && self.up_sent == out.len());
        let down = self.down.prefix();
        up_done && down.is_complete() && self.down_sent.iter().all(|&n| n == down.len())
    }
}

impl NodeProgram for TreeStreams {
    type Output = (Option<u32>, Option<Certificate>);

    fn step(&mut self, _round: u64, inbox: &[Symbol], outbox: &mut [Symbol]) -> Status {
        if self.halted {
            return Status::Halted;
        }
        for (i, &k) in self.children.iter().enumerate() {
            if let Some(c) = wire::decode(inbox[k]) {
                self.up
                    .push_child(i, c)
                    .expect("children stream valid subtree certificates");
            }
        }
        self.up.advance();
        match self.parent {
            Some(p) => {
                if let Some(c) = wire::decode(inbox[p]) {
                    self.down.push(c);
                }
            }
            None => {
                let have = self.down.prefix().len();
                let fresh = self.up.output().symbols()[have..].to_vec();
                for c in fresh {
                    self.down.push(c);
                }
            }
        }
        if self.finished() {
            self.halted = true;
            return Status::Halted;
        }
        if let Some(p) = self.parent {
            if let Some(&c) = self.up.output().symbols().get(self.up_sent) {
                outbox[p] = wire::encode(c);
                self.up_sent += 1;
            }
        }
        for (i, &k) in self.children.iter().enumerate() {
            if let Some(c) = self.down.child_symbol(self.down_sent[i], i) {
                outbox[k] = wire::encode(c);
                self.down_sent[i] += 1;
            }
        }
        Status::Running
    }

    fn output(&self) -> Self::Output {
        (self.number(), self.certificate())
    }
}
