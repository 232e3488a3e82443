//! Centralized reference algorithms. Every protocol output is checked
//! against these; none of them is used by the protocols themselves.

use std::collections::{BTreeSet, VecDeque};

use crate::net::{Configuration, Network, NodeId};

/// A spanning tree with ordered children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<u32>,
}

impl RootedTree {
    /// Builds a tree from ordered child lists. Panics if the lists do not
    /// describe a tree spanning `children.len()` nodes rooted at `root`.
    pub fn from_children(root: NodeId, children: Vec<Vec<NodeId>>) -> Self {
        let n = children.len();
        let mut parent = vec![None; n];
        let mut depth = vec![u32::MAX; n];
        depth[root.index()] = 0;
        let mut queue = VecDeque::from([root]);
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &c in &children[v.index()] {
                assert!(depth[c.index()] == u32::MAX, "node {c} has two parents");
                depth[c.index()] = depth[v.index()] + 1;
                parent[c.index()] = Some(v);
                reached += 1;
                queue.push_back(c);
            }
        }
        assert_eq!(reached, n, "child lists do not span all nodes");
        RootedTree {
            root,
            parent,
            children,
            depth,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v.index()]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v.index()]
    }

    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[v.index()]
    }

    /// Maximum depth over all nodes.
    pub fn height(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Nodes in numeration-via-BFS order: by depth, then by the order of
    /// parents, then by child order.
    pub fn bfs_order(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.len());
        order.push(self.root);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            order.extend_from_slice(&self.children[v.index()]);
        }
        order
    }

    pub fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        while self.depth(a) > self.depth(b) {
            a = self.parent(a).expect("non-root has a parent");
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent(b).expect("non-root has a parent");
        }
        while a != b {
            a = self.parent(a).expect("non-root has a parent");
            b = self.parent(b).expect("non-root has a parent");
        }
        a
    }

    /// The unique tree path from `from` to `to`, both ends included.
    pub fn path(&self, from: NodeId, to: NodeId) -> Vec<NodeId> {
        let meet = self.lca(from, to);
        let mut up = vec![from];
        let mut v = from;
        while v != meet {
            v = self.parent(v).expect("below lca");
            up.push(v);
        }
        let mut down = Vec::new();
        let mut v = to;
        while v != meet {
            down.push(v);
            v = self.parent(v).expect("below lca");
        }
        up.extend(down.into_iter().rev());
        up
    }

    /// Whether `v` lies in the subtree rooted at `top`.
    pub fn in_subtree(&self, top: NodeId, mut v: NodeId) -> bool {
        while self.depth(v) > self.depth(top) {
            v = self.parent(v).expect("non-root has a parent");
        }
        v == top
    }
}

/// Unordered node pairs stored as `(min, max)`.
pub type BridgeSet = BTreeSet<(NodeId, NodeId)>;

fn ordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

/// BFS tree rooted at the leader. A node's parent is the neighbour behind
/// its lowest port leading one level up; children are ordered by the
/// parent's port towards them.
pub fn bfs_tree(cfg: &Configuration) -> RootedTree {
    let net = &cfg.network;
    let dist = distances(net, cfg.leader);
    let mut children: Vec<Vec<(u32, NodeId)>> = vec![Vec::new(); net.node_count()];
    for v in net.nodes() {
        if v == cfg.leader {
            continue;
        }
        let &(p, back) = net
            .ports_of(v)
            .iter()
            .find(|(u, _)| dist[u.index()] + 1 == dist[v.index()])
            .expect("connected graph: every non-root has a neighbour one level up");
        children[p.index()].push((back.0, v));
    }
    let children = children
        .into_iter()
        .map(|mut row| {
            row.sort();
            row.into_iter().map(|(_, v)| v).collect()
        })
        .collect();
    RootedTree::from_children(cfg.leader, children)
}

fn distances(net: &Network, source: NodeId) -> Vec<u32> {
    let mut dist = vec![u32::MAX; net.node_count()];
    dist[source.index()] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for u in net.neighbors(v) {
            if dist[u.index()] == u32::MAX {
                dist[u.index()] = dist[v.index()] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Leader eccentricity; 0 for a single node.
pub fn height(cfg: &Configuration) -> u32 {
    distances(&cfg.network, cfg.leader).into_iter().max().unwrap_or(0)
}

/// Numeration via BFS: `numbers[v.index()]` is the number of `v` in `1..=V`.
pub fn canonical_numeration(tree: &RootedTree) -> Vec<u32> {
    let mut numbers = vec![0; tree.len()];
    for (i, v) in tree.bfs_order().into_iter().enumerate() {
        numbers[v.index()] = i as u32 + 1;
    }
    numbers
}

/// Exact bridge set by iterative DFS low-link.
pub fn bridges_dfs(cfg: &Configuration) -> BridgeSet {
    let net = &cfg.network;
    let n = net.node_count();
    let mut disc = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut bridges = BridgeSet::new();
    let mut time = 0;
    // (node, parent, next port to scan)
    let mut stack: Vec<(usize, Option<usize>, usize)> = Vec::new();
    disc[0] = 0;
    low[0] = 0;
    stack.push((0, None, 0));
    while let Some(frame) = stack.last_mut() {
        let (v, parent, next) = *frame;
        if next < net.degree(NodeId::from_index(v)) {
            frame.2 += 1;
            let (u, _) = net.peer(v, next);
            if Some(u) == parent {
                continue;
            }
            if disc[u] == u32::MAX {
                time += 1;
                disc[u] = time;
                low[u] = time;
                stack.push((u, Some(v), 0));
            } else {
                low[v] = low[v].min(disc[u]);
            }
        } else {
            stack.pop();
            if let Some(p) = parent {
                low[p] = low[p].min(low[v]);
                if low[v] > disc[p] {
                    bridges.insert(ordered(NodeId::from_index(p), NodeId::from_index(v)));
                }
            }
        }
    }
    bridges
}

/// Bridge set by deleting each edge in turn and re-checking connectivity.
pub fn bridges_by_removal(cfg: &Configuration) -> BridgeSet {
    let net = &cfg.network;
    let n = net.node_count();
    let mut bridges = BridgeSet::new();
    for (a, b) in net.edges() {
        let mut seen = vec![false; n];
        let mut stack = vec![a];
        seen[a.index()] = true;
        while let Some(v) = stack.pop() {
            for u in net.neighbors(v) {
                if (v, u) == (a, b) || (v, u) == (b, a) || seen[u.index()] {
                    continue;
                }
                seen[u.index()] = true;
                stack.push(u);
            }
        }
        if !seen[b.index()] {
            bridges.insert((a, b));
        }
    }
    bridges
}

/// Per-node cross-edge quantities relative to a spanning tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrossEdgeProfile {
    /// Depth in the tree.
    pub h: u32,
    /// Minimum over incident cross edges of the depth of the endpoints'
    /// lowest common ancestor; `h` when there are none.
    pub p: u32,
    /// Minimum of `p` over the subtree.
    pub g: u32,
    /// `D - g`, with `D` the tree height.
    pub g_reflected: u32,
    /// Minimum over incident cross edges of the shallower endpoint depth;
    /// `h` when there are none.
    pub p_endpoint: u32,
    /// Minimum of `p_endpoint` over the subtree.
    pub g_endpoint: u32,
}

/// Computes [`CrossEdgeProfile`] for every node. The tree must span the
/// configuration's network.
pub fn cross_edge_profile(cfg: &Configuration, tree: &RootedTree) -> Vec<CrossEdgeProfile> {
    let net = &cfg.network;
    let d = tree.height();
    let mut profile: Vec<CrossEdgeProfile> = net
        .nodes()
        .map(|v| {
            let h = tree.depth(v);
            let mut p = h;
            let mut p_endpoint = h;
            for u in net.neighbors(v) {
                if tree.parent(u) == Some(v) || tree.parent(v) == Some(u) {
                    continue;
                }
                p = p.min(tree.depth(tree.lca(u, v)));
                p_endpoint = p_endpoint.min(h.min(tree.depth(u)));
            }
            CrossEdgeProfile {
                h,
                p,
                g: p,
                g_reflected: 0,
                p_endpoint,
                g_endpoint: p_endpoint,
            }
        })
        .collect();
    for v in tree.bfs_order().into_iter().rev() {
        if let Some(parent) = tree.parent(v) {
            let child = profile[v.index()];
            let up = &mut profile[parent.index()];
            up.g = up.g.min(child.g);
            up.g_endpoint = up.g_endpoint.min(child.g_endpoint);
        }
    }
    for entry in &mut profile {
        entry.g_reflected = d - entry.g;
    }
    profile
}

/// Tree edges `(parent(v), v)` with `g(v) = h(v)`.
pub fn bridges_from_profile(tree: &RootedTree, profile: &[CrossEdgeProfile]) -> BridgeSet {
    (0..tree.len())
        .map(NodeId::from_index)
        .filter_map(|v| {
            let parent = tree.parent(v)?;
            let entry = profile[v.index()];
            (entry.g == entry.h).then(|| ordered(parent, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{generate, GraphKind, Network};

    fn cfg(n: usize, edges: &[(u32, u32)], leader: u32) -> Configuration {
        Configuration::new(Network::from_edges(n, edges).unwrap(), NodeId(leader)).unwrap()
    }

    fn ids(pairs: &[(u32, u32)]) -> BridgeSet {
        pairs.iter().map(|&(a, b)| ordered(NodeId(a), NodeId(b))).collect()
    }

    #[test]
    fn path_tree() {
        let c = cfg(3, &[(1, 2), (2, 3)], 1);
        let t = bfs_tree(&c);
        assert_eq!(t.parent(NodeId(2)), Some(NodeId(1)));
        assert_eq!(t.parent(NodeId(3)), Some(NodeId(2)));
        assert_eq!((0..3).map(|i| t.depth(NodeId::from_index(i))).collect::<Vec<_>>(), [0, 1, 2]);
        assert_eq!(canonical_numeration(&t), [1, 2, 3]);
        assert_eq!(height(&c), 2);
    }

    #[test]
    fn star_children_follow_ports() {
        let c = cfg(4, &[(1, 3), (1, 2), (1, 4)], 1);
        let t = bfs_tree(&c);
        assert_eq!(t.children(NodeId(1)), &[NodeId(3), NodeId(2), NodeId(4)]);
        assert_eq!(height(&c), 1);
        assert_eq!(canonical_numeration(&t), [1, 3, 2, 4]);
    }

    #[test]
    fn four_cycle_tie_break() {
        // Node 3 sees node 2 on port 0 and node 4 on port 1.
        let c = cfg(4, &[(1, 2), (2, 3), (3, 4), (4, 1)], 1);
        let t = bfs_tree(&c);
        assert_eq!(t.depth(NodeId(3)), 2);
        assert_eq!(t.parent(NodeId(3)), Some(NodeId(2)));
        // Same graph with node 3's ports swapped: the other legal BFS tree.
        let c = cfg(4, &[(1, 2), (3, 4), (2, 3), (4, 1)], 1);
        assert_eq!(bfs_tree(&c).parent(NodeId(3)), Some(NodeId(4)));
    }

    #[test]
    fn single_node() {
        let c = cfg(1, &[], 1);
        let t = bfs_tree(&c);
        assert_eq!(canonical_numeration(&t), [1]);
        assert_eq!(height(&c), 0);
        assert!(bridges_dfs(&c).is_empty());
    }

    #[test]
    fn tree_and_cycle_bridges() {
        let tree = generate(GraphKind::RandomTree, 30, 0, 5).unwrap();
        assert_eq!(bridges_dfs(&tree).len(), 29);
        let cycle = generate(GraphKind::Cycle, 9, 0, 0).unwrap();
        assert!(bridges_dfs(&cycle).is_empty());
    }

    #[test]
    fn triangle_with_pendant() {
        let c = cfg(4, &[(1, 2), (1, 3), (2, 3), (3, 4)], 1);
        assert_eq!(bridges_by_removal(&c), ids(&[(3, 4)]));
        assert_eq!(bridges_dfs(&c), ids(&[(3, 4)]));

        let t = bfs_tree(&c);
        let prof = cross_edge_profile(&c, &t);
        let two = prof[1];
        // Shallower-endpoint reading: g(2) = h(2) although 1-2 is not a bridge.
        assert_eq!((two.h, two.p_endpoint, two.g_endpoint), (1, 1, 1));
        // Common-ancestor reading: the cross edge 2-3 climbs to the root.
        assert_eq!((two.p, two.g), (0, 0));
        let four = prof[3];
        assert_eq!((four.h, four.g), (2, 2));
        assert_eq!(bridges_from_profile(&t, &prof), ids(&[(3, 4)]));
    }

    #[test]
    fn four_cycle_has_no_bridges_under_profile() {
        let c = cfg(4, &[(1, 2), (2, 3), (3, 4), (4, 1)], 1);
        let t = bfs_tree(&c);
        let prof = cross_edge_profile(&c, &t);
        for v in [2usize, 3, 4] {
            assert!(prof[v - 1].g < prof[v - 1].h, "node {v}: {:?}", prof[v - 1]);
        }
        assert!(bridges_from_profile(&t, &prof).is_empty());
        // The shallower-endpoint reading wrongly flags the edge 1-4.
        assert_eq!(prof[3].g_endpoint, prof[3].h);
    }

    #[test]
    fn leaf_without_cross_edges() {
        let c = cfg(3, &[(1, 2), (2, 3)], 1);
        let prof = cross_edge_profile(&c, &bfs_tree(&c));
        assert_eq!((prof[2].p, prof[2].g, prof[2].h), (2, 2, 2));
        assert_eq!(prof.iter().map(|e| e.g_reflected).collect::<Vec<_>>(), [2, 1, 0]);
    }

    #[test]
    fn tree_paths() {
        let c = cfg(5, &[(1, 2), (1, 3), (2, 4), (3, 5)], 1);
        let t = bfs_tree(&c);
        assert_eq!(t.path(NodeId(4), NodeId(5)), ids_vec(&[4, 2, 1, 3, 5]));
        assert_eq!(t.path(NodeId(1), NodeId(1)), ids_vec(&[1]));
        assert!(t.in_subtree(NodeId(2), NodeId(4)));
        assert!(!t.in_subtree(NodeId(3), NodeId(4)));
    }

    fn ids_vec(v: &[u32]) -> Vec<NodeId> {
        v.iter().map(|&x| NodeId(x)).collect()
    }
}
