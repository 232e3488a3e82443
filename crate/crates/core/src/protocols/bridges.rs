use crate::certify::{decode_tree, Certificate};
use crate::engine::{NodeProgram, Status, Symbol};
use crate::net::NodeId;

const ZERO: Symbol = Symbol(1);
const ONE: Symbol = Symbol(2);

#[derive(Clone, Copy, Debug, Default)]
struct ChildStream {
    ones: u32,
    done: bool,
}

/// Bridge search on a numbered BFS tree.
///
/// With `h` the depth and `D` the height, let `P(v)` be the smallest depth
/// of `lca(v, u)` over cross edges `(v, u)` (`h(v)` if there are none), and
/// `g(v)` the minimum of `P` over the subtree of `v`. The edge from `v` to
/// its parent is a bridge iff `g(v) = h(v)`.
///
/// Each node streams `g'(v) = D - g(v)` to its parent in unary (`1`s and a
/// closing `0`), the pointwise maximum of its own `D - P(v)` and its
/// children's streams, so one round after a child's `i`-th symbol arrives
/// the node can emit its own.
#[derive(Clone, Debug)]
pub struct BridgeSearch {
    parent: Option<usize>,
    children: Vec<usize>,
    d: u32,
    h: u32,
    own: u32,
    streams: Vec<ChildStream>,
    emitted: u32,
    sent_zero: bool,
    halted: bool,
}

/// Tree edges of one node, as found by [`BridgeSearch`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BridgeFlags {
    /// Whether the edge to the parent is a bridge (`None` at the root or
    /// before the node knows).
    pub parent: Option<bool>,
    /// One flag per child, in child order, once its stream has ended.
    pub children: Vec<Option<bool>>,
}

impl BridgeSearch {
    pub const ALPHABET: u16 = 3;

    /// `certificate` is the node's own node certificate (the plain one at
    /// the root), `number` its number, `neighbours` the number behind each
    /// port and `children` its child ports in tree order.
    pub fn new(
        certificate: &Certificate,
        number: u32,
        neighbours: &[u32],
        parent: Option<usize>,
        children: Vec<usize>,
    ) -> Self {
        let tree = decode_tree(certificate).expect("valid certificate");
        let me = NodeId(number);
        let h = tree.depth(me);
        let mut p = h;
        for &u in neighbours {
            let u = NodeId(u);
            if tree.parent(u) == Some(me) || tree.parent(me) == Some(u) {
                continue;
            }
            p = p.min(tree.depth(tree.lca(me, u)));
        }
        let d = tree.height();
        BridgeSearch {
            parent,
            streams: vec![ChildStream::default(); children.len()],
            children,
            d,
            h,
            own: d - p,
            emitted: 0,
            sent_zero: false,
            halted: false,
        }
    }

    /// Next symbol of the own stream, if already determined.
    fn next_symbol(&self) -> Option<Symbol> {
        let i = self.emitted;
        if self.own > i || self.streams.iter().any(|s| s.ones > i) {
            return Some(ONE);
        }
        self.streams.iter().all(|s| s.done).then_some(ZERO)
    }

    pub fn flags(&self) -> BridgeFlags {
        BridgeFlags {
            parent: (self.parent.is_some() && self.sent_zero).then(|| self.emitted == self.d - self.h),
            children: self
                .streams
                .iter()
                .map(|s| s.done.then(|| s.ones == self.d - self.h - 1))
                .collect(),
        }
    }
}

impl NodeProgram for BridgeSearch {
    type Output = BridgeFlags;

    fn step(&mut self, _round: u64, inbox: &[Symbol], outbox: &mut [Symbol]) -> Status {
        if self.halted {
            return Status::Halted;
        }
        for (stream, &k) in self.streams.iter_mut().zip(&self.children) {
            if stream.done {
                continue;
            }
            match inbox[k] {
                ONE => stream.ones += 1,
                ZERO => stream.done = true,
                _ => {}
            }
        }
        let children_done = self.streams.iter().all(|s| s.done);
        let own_done = self.parent.is_none() || self.sent_zero;
        if children_done && own_done {
            self.halted = true;
            return Status::Halted;
        }
        if let (Some(p), false) = (self.parent, self.sent_zero) {
            if let Some(s) = self.next_symbol() {
                outbox[p] = s;
                if s == ZERO {
                    self.sent_zero = true;
                } else {
                    self.emitted += 1;
                }
            }
        }
        Status::Running
    }

    fn output(&self) -> BridgeFlags {
        self.flags()
    }
}
