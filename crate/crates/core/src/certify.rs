//! BFS-certificates of rooted trees.
//!
//! The certificate of a tree lists one block per node in numeration order;
//! the block of a node with `k` children is `k` marks followed by `0`. A mark
//! is `1`, or `2` when it is singled out: in a node certificate the mark of
//! the node's own incoming edge is `2`, and in a bridge certificate every
//! bridge edge is `2`.
//!
//! Certificates can be produced incrementally. [`SubtreeAssembler`] builds the
//! certificate of a subtree from prefixes of its children's certificates, and
//! [`NodeCertificateStream`] derives each child's node certificate from a
//! prefix of the parent's own, symbol by symbol.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::net::NodeId;
use crate::oracle::RootedTree;

pub const ZERO: u8 = b'0';
pub const ONE: u8 = b'1';
pub const TWO: u8 = b'2';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertError {
    #[error("invalid certificate symbol {0:?}")]
    InvalidSymbol(char),
    #[error("symbol after the certificate is complete")]
    Trailing,
    #[error("certificate is incomplete")]
    Incomplete,
    #[error("certificate is empty")]
    Empty,
    #[error("expected exactly one `2`, found {0}")]
    MarkerCount(usize),
    #[error("node {number} is outside 1..={count}")]
    OutOfRange { number: u32, count: usize },
    #[error("child index {index} is outside the block of {children} children")]
    ChildOutOfRange { index: usize, children: usize },
    #[error("bridge certificate cannot mark node {0}")]
    BadBridgeChild(u32),
}

/// A string over `{0, 1, 2}` stored as ASCII bytes.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Certificate(Vec<u8>);

impl Certificate {
    pub fn from_symbols(symbols: Vec<u8>) -> Result<Self, CertError> {
        if let Some(&bad) = symbols.iter().find(|s| !matches!(**s, ZERO | ONE | TWO)) {
            return Err(CertError::InvalidSymbol(bad as char));
        }
        Ok(Certificate(symbols))
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("ASCII")
    }

    /// Number of nodes described: the number of blocks.
    pub fn node_count(&self) -> usize {
        self.0.iter().filter(|&&s| s == ZERO).count()
    }

    /// Zeros exceed marks by exactly one.
    pub fn is_full(&self) -> bool {
        let zeros = self.node_count();
        zeros == self.0.len() - zeros + 1
    }

    /// Human-readable form: blocks separated by spaces, slices by ` – `.
    pub fn by_slices(&self) -> String {
        let mut stream = PrefixStream::new();
        let mut out = String::new();
        let mut layer = 0;
        let mut block_open = false;
        for &s in &self.0 {
            let sym_layer = stream.current_layer();
            if stream.push(s).is_err() {
                break;
            }
            if !block_open && !out.is_empty() {
                out.push_str(if sym_layer != layer { " – " } else { " " });
            }
            layer = sym_layer;
            out.push(s as char);
            block_open = s != ZERO;
        }
        out
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Certificate({})", self.as_str())
    }
}

impl FromStr for Certificate {
    type Err = CertError;

    /// Whitespace and dashes are display separators and are dropped.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let symbols = s
            .chars()
            .filter(|c| !c.is_whitespace() && !matches!(c, '-' | '–' | '—'))
            .map(|c| match c {
                '0' | '1' | '2' => Ok(c as u8),
                other => Err(CertError::InvalidSymbol(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Certificate(symbols))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Layer {
    start: usize,
    end: Option<usize>,
}

/// Growing prefix of a certificate together with its slice structure.
///
/// Slice 0 is the first block. Slice `m + 1` has as many blocks as slice `m`
/// has marks. The stream is complete once a slice ends without marks, which
/// is exactly when zeros outnumber marks by one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixStream {
    symbols: Vec<u8>,
    zeros: usize,
    layers: Vec<Layer>,
    blocks_left: usize,
    marks_in_layer: usize,
    complete: bool,
}

impl Default for PrefixStream {
    fn default() -> Self {
        Self::new()
    }
}

impl PrefixStream {
    pub fn new() -> Self {
        PrefixStream {
            symbols: Vec::new(),
            zeros: 0,
            layers: vec![Layer { start: 0, end: None }],
            blocks_left: 1,
            marks_in_layer: 0,
            complete: false,
        }
    }

    pub fn push(&mut self, symbol: u8) -> Result<(), CertError> {
        if self.complete {
            return Err(CertError::Trailing);
        }
        match symbol {
            ONE | TWO => self.marks_in_layer += 1,
            ZERO => {
                self.zeros += 1;
                self.blocks_left -= 1;
            }
            other => return Err(CertError::InvalidSymbol(other as char)),
        }
        self.symbols.push(symbol);
        if symbol == ZERO && self.blocks_left == 0 {
            let len = self.symbols.len();
            self.layers.last_mut().expect("at least one layer").end = Some(len);
            if self.marks_in_layer == 0 {
                self.complete = true;
            } else {
                self.blocks_left = self.marks_in_layer;
                self.marks_in_layer = 0;
                self.layers.push(Layer { start: len, end: None });
            }
        }
        Ok(())
    }

    pub fn extend(&mut self, symbols: &[u8]) -> Result<(), CertError> {
        symbols.iter().try_for_each(|&s| self.push(s))
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn zeros(&self) -> usize {
        self.zeros
    }

    /// Index of the slice the next symbol belongs to.
    fn current_layer(&self) -> usize {
        self.layers.len() - 1
    }

    /// Symbols of slice `m` received so far, and whether the slice is known
    /// to be finished. `None` when it is not yet known whether slice `m`
    /// exists.
    fn layer(&self, m: usize) -> Option<(&[u8], bool)> {
        match self.layers.get(m) {
            Some(layer) => {
                let end = layer.end.unwrap_or(self.symbols.len());
                Some((&self.symbols[layer.start..end], layer.end.is_some()))
            }
            None if self.complete => Some((&[], true)),
            None => None,
        }
    }

    pub fn into_certificate(self) -> Result<Certificate, CertError> {
        if !self.complete {
            return Err(CertError::Incomplete);
        }
        Ok(Certificate(self.symbols))
    }
}

/// Certificate of `tree` with nodes taken in numeration-via-BFS order.
pub fn encode_tree(tree: &RootedTree) -> Certificate {
    let mut symbols = Vec::with_capacity(2 * tree.len());
    for v in tree.bfs_order() {
        symbols.extend(std::iter::repeat_n(ONE, tree.children(v).len()));
        symbols.push(ZERO);
    }
    Certificate(symbols)
}

fn parse_full(cert: &Certificate) -> Result<PrefixStream, CertError> {
    if cert.is_empty() {
        return Err(CertError::Empty);
    }
    let mut stream = PrefixStream::new();
    stream.extend(cert.symbols())?;
    if !stream.is_complete() {
        return Err(CertError::Incomplete);
    }
    Ok(stream)
}

/// Rebuilds the tree; node `i` of the result is the node numbered `i`.
/// Marks `1` and `2` are treated alike.
pub fn decode_tree(cert: &Certificate) -> Result<RootedTree, CertError> {
    parse_full(cert)?;
    let n = cert.node_count();
    let mut children = vec![Vec::new(); n];
    let mut block = 0;
    let mut next = 2u32;
    for &s in cert.symbols() {
        if s == ZERO {
            block += 1;
        } else {
            children[block].push(NodeId(next));
            next += 1;
        }
    }
    Ok(RootedTree::from_children(NodeId(1), children))
}

/// Certificate of node `i`: the `(i-1)`-th mark becomes `2`. Node 1 is the
/// root and has no incoming edge; its certificate is `cert` itself.
pub fn node_certificate(cert: &Certificate, i: u32) -> Result<Certificate, CertError> {
    let n = cert.node_count();
    if i == 0 || i as usize > n {
        return Err(CertError::OutOfRange { number: i, count: n });
    }
    let mut symbols = cert.symbols().to_vec();
    if i > 1 {
        let pos = symbols
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != ZERO)
            .nth(i as usize - 2)
            .map(|(p, _)| p)
            .ok_or(CertError::Incomplete)?;
        symbols[pos] = TWO;
    }
    Ok(Certificate(symbols))
}

/// Place of a node read from its certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub number: u32,
    pub parent: u32,
    pub depth: u32,
}

/// Reads number, parent number and depth from a certificate with one `2`.
pub fn decode_position(cert: &Certificate) -> Result<Position, CertError> {
    let markers = cert.symbols().iter().filter(|&&s| s == TWO).count();
    if markers != 1 {
        return Err(CertError::MarkerCount(markers));
    }
    let tree = decode_tree(cert)?;
    let pos = cert.symbols().iter().position(|&s| s == TWO).expect("one marker");
    let before = &cert.symbols()[..pos];
    let zeros = before.iter().filter(|&&s| s == ZERO).count() as u32;
    let marks = before.len() as u32 - zeros;
    let number = marks + 2;
    Ok(Position {
        number,
        parent: zeros + 1,
        depth: tree.depth(NodeId(number)),
    })
}

/// Tree path between two numbered nodes, both ends included.
pub fn tree_path(cert: &Certificate, from: u32, to: u32) -> Result<Vec<u32>, CertError> {
    let tree = decode_tree(cert)?;
    let n = tree.len();
    for x in [from, to] {
        if x == 0 || x as usize > n {
            return Err(CertError::OutOfRange { number: x, count: n });
        }
    }
    Ok(tree.path(NodeId(from), NodeId(to)).into_iter().map(|v| v.0).collect())
}

/// Bridge certificate: the mark of every node in `bridge_children` (whose
/// edge to its parent is a bridge) becomes `2`.
pub fn bridges_certificate(
    cert: &Certificate,
    bridge_children: &BTreeSet<u32>,
) -> Result<Certificate, CertError> {
    let n = cert.node_count();
    if let Some(&bad) = bridge_children.iter().find(|&&c| c < 2 || c as usize > n) {
        return Err(CertError::BadBridgeChild(bad));
    }
    let mut child = 1u32;
    let symbols = cert
        .symbols()
        .iter()
        .map(|&s| {
            if s == ZERO {
                return ZERO;
            }
            child += 1;
            if bridge_children.contains(&child) {
                TWO
            } else {
                ONE
            }
        })
        .collect();
    Ok(Certificate(symbols))
}

/// Bridges of a bridge certificate as `(parent number, child number)`.
pub fn decode_bridges(cert: &Certificate) -> Result<Vec<(u32, u32)>, CertError> {
    parse_full(cert)?;
    let mut block = 1;
    let mut child = 1;
    let mut out = Vec::new();
    for &s in cert.symbols() {
        match s {
            ZERO => block += 1,
            _ => {
                child += 1;
                if s == TWO {
                    out.push((block, child));
                }
            }
        }
    }
    Ok(out)
}

/// Streams the certificate of a subtree from prefixes of its children's
/// subtree certificates.
///
/// Slice 0 of the output is the node's own block; slice `m` is the
/// concatenation, in child order, of slice `m - 1` of every child. Given
/// `l`-prefixes of all children the assembler has produced at least
/// `l + 1` symbols (or the whole certificate, if shorter).
#[derive(Clone, Debug)]
pub struct SubtreeAssembler {
    children: Vec<PrefixStream>,
    out: PrefixStream,
    layer: usize,
    child: usize,
    taken: usize,
}

impl SubtreeAssembler {
    /// `own_marks` are the marks of the node's own block, one per child.
    pub fn new(own_marks: &[u8]) -> Result<Self, CertError> {
        let mut out = PrefixStream::new();
        for &m in own_marks {
            if m == ZERO {
                return Err(CertError::InvalidSymbol('0'));
            }
            out.push(m)?;
        }
        out.push(ZERO)?;
        Ok(SubtreeAssembler {
            children: vec![PrefixStream::new(); own_marks.len()],
            out,
            layer: 1,
            child: 0,
            taken: 0,
        })
    }

    /// Leaf-style constructor with `children` plain `1` marks.
    pub fn with_children(children: usize) -> Self {
        Self::new(&vec![ONE; children]).expect("plain marks are valid")
    }

    /// Appends the next symbol of child `index`'s stream.
    pub fn push_child(&mut self, index: usize, symbol: u8) -> Result<(), CertError> {
        let children = self.children.len();
        self.children
            .get_mut(index)
            .ok_or(CertError::ChildOutOfRange { index, children })?
            .push(symbol)
    }

    pub fn child(&self, index: usize) -> &PrefixStream {
        &self.children[index]
    }

    /// Extends the output as far as the children's prefixes allow.
    pub fn advance(&mut self) {
        while !self.out.is_complete() {
            if self.child == self.children.len() {
                self.layer += 1;
                self.child = 0;
                self.taken = 0;
                continue;
            }
            let Some((segment, finished)) = self.children[self.child].layer(self.layer - 1) else {
                return;
            };
            let fresh = segment[self.taken..].to_vec();
            self.taken = segment.len();
            for s in fresh {
                self.out.push(s).expect("children streams are valid subtree certificates");
            }
            if !finished {
                return;
            }
            self.child += 1;
            self.taken = 0;
        }
    }

    pub fn output(&self) -> &PrefixStream {
        &self.out
    }
}

/// Maximal prefix of the subtree certificate computable from the given
/// prefixes of the children's certificates.
pub fn subtree_prefix(own_marks: &[u8], child_prefixes: &[&[u8]]) -> Result<Vec<u8>, CertError> {
    if own_marks.len() != child_prefixes.len() {
        return Err(CertError::ChildOutOfRange {
            index: child_prefixes.len(),
            children: own_marks.len(),
        });
    }
    let mut asm = SubtreeAssembler::new(own_marks)?;
    for (i, prefix) in child_prefixes.iter().enumerate() {
        for &s in *prefix {
            asm.push_child(i, s)?;
        }
    }
    asm.advance();
    Ok(asm.output().symbols().to_vec())
}

/// A node's own certificate as it arrives, and the matching prefixes of its
/// children's certificates.
///
/// Until the node's own `2` has been seen the children's prefixes equal the
/// node's prefix. Afterwards the node knows its number `n`; its `2` reverts
/// to `1` and the `k`-th mark of block `n` becomes `2` for child `k`.
#[derive(Clone, Debug)]
pub struct NodeCertificateStream {
    stream: PrefixStream,
    number: Option<u32>,
    marks_seen: u32,
    own_block_start: Option<usize>,
    own_children: Option<usize>,
}

impl NodeCertificateStream {
    /// The root is node 1 from the start; other nodes learn their number
    /// from the stream.
    pub fn new(is_root: bool) -> Self {
        NodeCertificateStream {
            stream: PrefixStream::new(),
            number: is_root.then_some(1),
            marks_seen: 0,
            own_block_start: is_root.then_some(0),
            own_children: None,
        }
    }

    pub fn push(&mut self, symbol: u8) -> Result<(), CertError> {
        self.stream.push(symbol)?;
        let pos = self.stream.len() - 1;
        if symbol == TWO {
            if self.number.is_some() {
                return Err(CertError::MarkerCount(2));
            }
            self.number = Some(self.marks_seen + 2);
        }
        if symbol != ZERO {
            self.marks_seen += 1;
        }
        if let Some(n) = self.number {
            if symbol == ZERO && self.stream.zeros() == n as usize - 1 {
                self.own_block_start = Some(pos + 1);
            }
            if symbol == ZERO && self.stream.zeros() == n as usize {
                let start = self.own_block_start.expect("block starts before it ends");
                self.own_children = Some(pos - start);
            }
        }
        Ok(())
    }

    pub fn prefix(&self) -> &PrefixStream {
        &self.stream
    }

    /// The node's number once it is determined.
    pub fn number(&self) -> Option<u32> {
        self.number
    }

    /// Symbol at `pos` of the certificate of child `k` (0-based), or `None`
    /// if the node's own prefix is shorter than `pos + 1`.
    pub fn child_symbol(&self, pos: usize, k: usize) -> Result<Option<u8>, CertError> {
        let Some(&s) = self.stream.symbols().get(pos) else {
            return Ok(None);
        };
        if let Some(children) = self.own_children {
            if k >= children {
                return Err(CertError::ChildOutOfRange { index: k, children });
            }
        }
        if s == TWO {
            return Ok(Some(ONE));
        }
        match self.own_block_start {
            Some(start) if pos == start + k => {
                if s == ZERO {
                    let children = pos - start;
                    return Err(CertError::ChildOutOfRange { index: k, children });
                }
                Ok(Some(TWO))
            }
            _ => Ok(Some(s)),
        }
    }
}

/// Prefix of child `k`'s certificate computable from a prefix of the
/// node's own certificate (the plain certificate at the root).
pub fn child_prefix(own_prefix: &[u8], is_root: bool, k: usize) -> Result<Vec<u8>, CertError> {
    let mut stream = NodeCertificateStream::new(is_root);
    for &s in own_prefix {
        stream.push(s)?;
    }
    (0..own_prefix.len())
        .map(|pos| stream.child_symbol(pos, k).map(|s| s.expect("within prefix")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER: &str = "1110 – 110 10 110 – 110 0 0 10 0 – 000";
    const PAPER_NODE7: &str = "1110 – 110 20 110 – 110 0 0 10 0 – 000";

    fn cert(s: &str) -> Certificate {
        s.parse().unwrap()
    }

    #[test]
    fn paper_example_shape() {
        let c = cert(PAPER);
        assert_eq!(c.as_str(), "11101101011011000100000");
        let t = decode_tree(&c).unwrap();
        assert_eq!(t.len(), 12);
        let counts: Vec<usize> = (1..=12).map(|i| t.children(NodeId(i)).len()).collect();
        assert_eq!(counts, [3, 2, 1, 2, 2, 0, 0, 1, 0, 0, 0, 0]);
        assert_eq!(encode_tree(&t), c);
        assert_eq!(c.by_slices(), "1110 – 110 10 110 – 110 0 0 10 0 – 0 0 0");
    }

    #[test]
    fn paper_node_seven() {
        let c = cert(PAPER);
        let seven = node_certificate(&c, 7).unwrap();
        assert_eq!(seven, cert(PAPER_NODE7));
        assert_eq!(
            decode_position(&seven).unwrap(),
            Position { number: 7, parent: 3, depth: 2 }
        );
        assert_eq!(tree_path(&seven, 7, 1).unwrap(), [7, 3, 1]);
    }

    #[test]
    fn small_certificates() {
        assert_eq!(cert("0").node_count(), 1);
        assert_eq!(decode_tree(&cert("0")).unwrap().len(), 1);
        assert_eq!(decode_tree(&cert("100")).unwrap().children(NodeId(1)), &[NodeId(2)]);
        assert_eq!(node_certificate(&cert("100"), 2).unwrap(), cert("200"));
        assert_eq!(node_certificate(&cert("100"), 1).unwrap(), cert("100"));
        assert_eq!(
            decode_position(&cert("200")).unwrap(),
            Position { number: 2, parent: 1, depth: 1 }
        );
        assert_eq!(tree_path(&cert("100"), 1, 2).unwrap(), [1, 2]);
        assert_eq!(tree_path(&cert("100"), 1, 1).unwrap(), [1]);
    }

    #[test]
    fn malformed_certificates() {
        assert_eq!(decode_tree(&cert("10")), Err(CertError::Incomplete));
        assert_eq!(decode_tree(&cert("1000")), Err(CertError::Trailing));
        assert_eq!(decode_tree(&cert("")), Err(CertError::Empty));
        assert_eq!(
            decode_position(&cert("1110110201101100010 2000")),
            Err(CertError::MarkerCount(2))
        );
        assert_eq!(decode_position(&cert("100")), Err(CertError::MarkerCount(0)));
        assert_eq!(
            node_certificate(&cert("100"), 3),
            Err(CertError::OutOfRange { number: 3, count: 2 })
        );
        assert_eq!(tree_path(&cert("100"), 1, 3), Err(CertError::OutOfRange { number: 3, count: 2 }));
        assert!("10x".parse::<Certificate>().is_err());
    }

    #[test]
    fn prefix_fullness_only_at_end() {
        let c = cert(PAPER);
        let mut s = PrefixStream::new();
        for (i, &sym) in c.symbols().iter().enumerate() {
            s.push(sym).unwrap();
            assert_eq!(s.is_complete(), i + 1 == c.len());
        }
        assert_eq!(s.push(ZERO), Err(CertError::Trailing));
    }

    #[test]
    fn subtree_of_node_two() {
        // Subtree of node 2 in the 12-node example: 2 -> {5, 6}, 5 -> {10, 11}.
        let leaf: &[u8] = b"0";
        let five = subtree_prefix(b"11", &[leaf, leaf]).unwrap();
        assert_eq!(five, b"11000");
        let two = subtree_prefix(b"11", &[&five, leaf]).unwrap();
        assert_eq!(two, b"110110000");
    }

    #[test]
    fn leaf_stream_is_complete_immediately() {
        let asm = SubtreeAssembler::with_children(0);
        assert!(asm.output().is_complete());
        assert_eq!(asm.output().symbols(), b"0");
    }

    #[test]
    fn root_of_paper_tree_from_full_children() {
        let c = cert(PAPER);
        let t = decode_tree(&c).unwrap();
        let sub = |v: u32| -> Vec<u8> {
            let mut children = Vec::new();
            let mut order = vec![NodeId(v)];
            let mut head = 0;
            while head < order.len() {
                let x = order[head];
                head += 1;
                children.push(t.children(x).len());
                order.extend_from_slice(t.children(x));
            }
            children
                .into_iter()
                .flat_map(|k| std::iter::repeat_n(ONE, k).chain([ZERO]))
                .collect()
        };
        let kids: Vec<Vec<u8>> = [2, 3, 4].iter().map(|&v| sub(v)).collect();
        let refs: Vec<&[u8]> = kids.iter().map(|k| k.as_slice()).collect();
        assert_eq!(subtree_prefix(b"111", &refs).unwrap(), c.symbols());
        assert_eq!(kids[0], b"110110000");
    }

    #[test]
    fn child_extraction() {
        assert_eq!(child_prefix(b"100", true, 0).unwrap(), b"200");
        assert_eq!(child_prefix(b"1", true, 0).unwrap(), b"2");
        // Before the node's own 2 arrives its children see the same prefix.
        assert_eq!(child_prefix(b"11", false, 0).unwrap(), b"11");
        let three = node_certificate(&cert(PAPER), 3).unwrap();
        let seven = child_prefix(three.symbols(), false, 0).unwrap();
        assert_eq!(seven, cert(PAPER_NODE7).symbols());
        assert!(matches!(
            child_prefix(three.symbols(), false, 1),
            Err(CertError::ChildOutOfRange { index: 1, children: 1 })
        ));
    }

    #[test]
    fn bridge_certificates() {
        let c = cert("10100");
        let all: BTreeSet<u32> = [2, 3].into();
        let b = bridges_certificate(&c, &all).unwrap();
        assert_eq!(b, cert("20200"));
        assert_eq!(decode_bridges(&b).unwrap(), [(1, 2), (2, 3)]);
        assert_eq!(bridges_certificate(&c, &BTreeSet::new()).unwrap(), c);
        assert!(decode_bridges(&c).unwrap().is_empty());
        assert_eq!(
            bridges_certificate(&c, &[1].into()),
            Err(CertError::BadBridgeChild(1))
        );
    }
}
