//! Rooted spanning trees: ancestry, least common ancestors, treefix sums.
//!
//! Vertices are numbered in a heavy-child-first preorder, so that
//! `entry[v]` doubles as the position of `v` in the heavy-path layout used
//! by [`crate::path_aggregate`].
//!
//! LCA queries use a sparse table over that preorder (O(n log n) build,
//! O(1) query), so labelling every graph edge costs O(m + n log n).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::packing::SpanningTree;

pub const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct RootedTree {
    root: usize,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    size: Vec<usize>,
    order: Vec<usize>,
    entry: Vec<usize>,
    head: Vec<usize>,
    sparse: Vec<Vec<u32>>,
}

impl RootedTree {
    /// Roots the spanning tree `t` of `g` at `root`.
    pub fn from_spanning_tree(g: &WeightedGraph, t: &SpanningTree, root: usize) -> Result<Self> {
        let n = g.n();
        if root >= n {
            return Err(Error::VertexOutOfRange { vertex: root, n });
        }
        if t.edges.len() + 1 != n {
            return Err(Error::InvalidTree("tree must have n - 1 edges"));
        }
        let mut adj = vec![Vec::new(); n];
        for &id in &t.edges {
            if id >= g.m() {
                return Err(Error::InvalidTree("edge id out of range"));
            }
            let e = g.edge(id);
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut parent = vec![NONE; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut stack = vec![root];
        let mut reached = 1;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    reached += 1;
                    stack.push(y);
                }
            }
        }
        if reached != n {
            return Err(Error::InvalidTree("edges do not span the graph"));
        }
        Self::from_parents(parent, root)
    }

    /// Builds from a parent array where `parent[root] == NONE`.
    pub fn from_parents(parent: Vec<usize>, root: usize) -> Result<Self> {
        let n = parent.len();
        if root >= n || parent[root] != NONE {
            return Err(Error::InvalidTree("root must have no parent"));
        }
        let mut children = vec![Vec::new(); n];
        for (v, &p) in parent.iter().enumerate() {
            if v == root {
                continue;
            }
            if p >= n || p == v {
                return Err(Error::InvalidTree("bad parent pointer"));
            }
            children[p].push(v);
        }

        // BFS order to get depths and detect unreachable vertices (cycles).
        let mut depth = vec![0; n];
        let mut bfs = Vec::with_capacity(n);
        bfs.push(root);
        let mut i = 0;
        while i < bfs.len() {
            let x = bfs[i];
            i += 1;
            for &c in &children[x] {
                depth[c] = depth[x] + 1;
                bfs.push(c);
            }
        }
        if bfs.len() != n {
            return Err(Error::InvalidTree("parent pointers contain a cycle"));
        }

        let mut size = vec![1usize; n];
        for &x in bfs.iter().rev() {
            if x != root {
                size[parent[x]] += size[x];
            }
        }
        for ch in children.iter_mut() {
            // heavy child first, ties by id
            ch.sort_by(|&a, &b| size[b].cmp(&size[a]).then(a.cmp(&b)));
        }

        let mut order = Vec::with_capacity(n);
        let mut entry = vec![0; n];
        let mut head = vec![0; n];
        head[root] = root;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            entry[x] = order.len();
            order.push(x);
            for (k, &c) in children[x].iter().enumerate().rev() {
                head[c] = if k == 0 { head[x] } else { c };
                stack.push(c);
            }
        }

        let sparse = build_sparse(&order, &depth);
        Ok(Self {
            root,
            parent,
            children,
            depth,
            size,
            order,
            entry,
            head,
            sparse,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    #[inline]
    pub fn root(&self) -> usize {
        self.root
    }

    /// Parent of `v`, or [`NONE`] for the root.
    #[inline]
    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    #[inline]
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    #[inline]
    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    #[inline]
    pub fn subtree_size(&self, v: usize) -> usize {
        self.size[v]
    }

    /// Preorder (heavy child first).
    pub fn preorder(&self) -> &[usize] {
        &self.order
    }

    #[inline]
    pub fn entry(&self, v: usize) -> usize {
        self.entry[v]
    }

    /// One past the last preorder index of `v`'s subtree.
    #[inline]
    pub fn exit(&self, v: usize) -> usize {
        self.entry[v] + self.size[v]
    }

    /// Top vertex of the heavy path containing `v`.
    #[inline]
    pub fn head(&self, v: usize) -> usize {
        self.head[v]
    }

    /// `d` is in `a`'s subtree (inclusive).
    #[inline]
    pub fn is_ancestor(&self, a: usize, d: usize) -> bool {
        self.entry[a] <= self.entry[d] && self.entry[d] < self.exit(a)
    }

    /// Neither vertex lies on the other's root path.
    #[inline]
    pub fn incomparable(&self, v: usize, w: usize) -> bool {
        !self.is_ancestor(v, w) && !self.is_ancestor(w, v)
    }

    pub fn lca(&self, u: usize, v: usize) -> usize {
        if u == v {
            return u;
        }
        let (mut a, mut b) = (self.entry[u], self.entry[v]);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        // shallowest vertex in preorder (a, b] is a child of the LCA
        let lo = a + 1;
        let len = b + 1 - lo;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        let x = self.sparse[k][lo] as usize;
        let y = self.sparse[k][b + 1 - (1 << k)] as usize;
        let top = if self.depth[x] <= self.depth[y] { x } else { y };
        self.parent[top]
    }

    /// LCA of the endpoints of every edge of `g`.
    pub fn lca_all_edges(&self, g: &WeightedGraph) -> Vec<usize> {
        g.edges().iter().map(|e| self.lca(e.u, e.v)).collect()
    }

    /// `out[v] = sum of f over v's subtree`.
    pub fn treefix_sum(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n(), "treefix input has wrong length");
        let mut out = f.to_vec();
        for &x in self.order.iter().rev() {
            let p = self.parent[x];
            if p != NONE {
                out[p] += out[x];
            }
        }
        out
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty() && (v != self.root || self.n() == 1)
    }

    pub fn leaf_count(&self) -> usize {
        (0..self.n()).filter(|&v| self.is_leaf(v)).count()
    }

    /// Membership of `v`'s subtree.
    pub fn subtree_side(&self, v: usize) -> Vec<bool> {
        let mut side = vec![false; self.n()];
        for &x in &self.order[self.entry[v]..self.exit(v)] {
            side[x] = true;
        }
        side
    }
}

fn build_sparse(order: &[usize], depth: &[usize]) -> Vec<Vec<u32>> {
    let n = order.len();
    let mut table = vec![order.iter().map(|&v| v as u32).collect::<Vec<_>>()];
    let mut k = 1;
    while (1 << k) <= n {
        let prev = &table[k - 1];
        let half = 1 << (k - 1);
        let row: Vec<u32> = (0..=n - (1 << k))
            .map(|i| {
                let (a, b) = (prev[i], prev[i + half]);
                if depth[a as usize] <= depth[b as usize] {
                    a
                } else {
                    b
                }
            })
            .collect();
        table.push(row);
        k += 1;
    }
    table
}

/// A cut selected by one or two tree edges, each named by its lower
/// endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeCut {
    /// Side `v↓`.
    One { v: usize },
    /// Side `v↓ ∪ w↓` for incomparable `v`, `w`.
    Incomparable { v: usize, w: usize },
    /// Side `outer↓ − inner↓` with `inner` a proper descendant of `outer`.
    Nested { inner: usize, outer: usize },
}

impl TreeCut {
    pub fn side(&self, rt: &RootedTree) -> Vec<bool> {
        match *self {
            TreeCut::One { v } => rt.subtree_side(v),
            TreeCut::Incomparable { v, w } => {
                let mut s = rt.subtree_side(v);
                for &x in &rt.preorder()[rt.entry(w)..rt.exit(w)] {
                    s[x] = true;
                }
                s
            }
            TreeCut::Nested { inner, outer } => {
                let mut s = rt.subtree_side(outer);
                for &x in &rt.preorder()[rt.entry(inner)..rt.exit(inner)] {
                    s[x] = false;
                }
                s
            }
        }
    }

    /// Lower endpoints of the crossing tree edges.
    pub fn tree_edges(&self) -> Vec<usize> {
        match *self {
            TreeCut::One { v } => vec![v],
            TreeCut::Incomparable { v, w } => vec![v.min(w), v.max(w)],
            TreeCut::Nested { inner, outer } => vec![inner.min(outer), inner.max(outer)],
        }
    }

    /// Relabels vertices through `f`.
    pub fn map(self, f: impl Fn(usize) -> usize) -> Self {
        match self {
            TreeCut::One { v } => TreeCut::One { v: f(v) },
            TreeCut::Incomparable { v, w } => TreeCut::Incomparable { v: f(v), w: f(w) },
            TreeCut::Nested { inner, outer } => TreeCut::Nested {
                inner: f(inner),
                outer: f(outer),
            },
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn random_parents(n: usize, seed: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let mut parent = vec![NONE; n];
        for i in 1..n {
            parent[perm[i]] = perm[rng.random_range(0..i)];
        }
        // reroot at vertex 0 by reversing its root path
        let mut prev = NONE;
        let mut x = 0;
        while x != NONE {
            let next = parent[x];
            parent[x] = prev;
            prev = x;
            x = next;
        }
        parent
    }

    fn naive_is_ancestor(parent: &[usize], a: usize, mut d: usize) -> bool {
        loop {
            if d == a {
                return true;
            }
            if parent[d] == NONE {
                return false;
            }
            d = parent[d];
        }
    }

    fn naive_depth(parent: &[usize], mut v: usize) -> usize {
        let mut d = 0;
        while parent[v] != NONE {
            v = parent[v];
            d += 1;
        }
        d
    }

    fn naive_lca(parent: &[usize], mut u: usize, mut v: usize) -> usize {
        let (mut du, mut dv) = (naive_depth(parent, u), naive_depth(parent, v));
        while du > dv {
            u = parent[u];
            du -= 1;
        }
        while dv > du {
            v = parent[v];
            dv -= 1;
        }
        while u != v {
            u = parent[u];
            v = parent[v];
        }
        u
    }

    fn path3() -> RootedTree {
        RootedTree::from_parents(vec![NONE, 0, 1], 0).unwrap()
    }

    #[test]
    fn path_and_star_depths() {
        let p = path3();
        assert_eq!((0..3).map(|v| p.depth(v)).collect::<Vec<_>>(), vec![0, 1, 2]);
        let star = RootedTree::from_parents(vec![NONE, 0, 0, 0], 0).unwrap();
        assert!((1..4).all(|v| star.depth(v) == 1));
        assert_eq!(star.leaf_count(), 3);
    }

    #[test]
    fn from_spanning_tree_roots_anywhere() {
        let g = WeightedGraph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
        let t = SpanningTree::new(vec![0, 1]);
        let rt = RootedTree::from_spanning_tree(&g, &t, 2).unwrap();
        assert_eq!(rt.parent(2), NONE);
        assert_eq!(rt.parent(1), 2);
        assert_eq!(rt.parent(0), 1);
        assert!(RootedTree::from_spanning_tree(&g, &SpanningTree::new(vec![0]), 0).is_err());
        let g4 = WeightedGraph::from_triples(4, &[(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(RootedTree::from_spanning_tree(&g4, &SpanningTree::new(vec![0, 1, 2]), 0).is_err());
    }

    #[test]
    fn rejects_cyclic_parents() {
        assert!(RootedTree::from_parents(vec![NONE, 2, 1], 0).is_err());
        assert!(RootedTree::from_parents(vec![1, 0], 0).is_err());
    }

    #[test]
    fn ancestry_matches_parent_chasing() {
        let parent = random_parents(50, 7);
        let rt = RootedTree::from_parents(parent.clone(), 0).unwrap();
        for a in 0..50 {
            assert_eq!(rt.depth(a), naive_depth(&parent, a));
            for d in 0..50 {
                assert_eq!(rt.is_ancestor(a, d), naive_is_ancestor(&parent, a, d));
                let inc = !naive_is_ancestor(&parent, a, d) && !naive_is_ancestor(&parent, d, a);
                assert_eq!(rt.incomparable(a, d), inc);
            }
        }
    }

    #[test]
    fn incomparable_basics() {
        let star = RootedTree::from_parents(vec![NONE, 0, 0, 0], 0).unwrap();
        assert!(!star.incomparable(0, 2));
        assert!(star.incomparable(1, 2));
    }

    #[test]
    fn treefix_examples() {
        let p = path3();
        assert_eq!(p.treefix_sum(&[1.0, 2.0, 3.0]), vec![6.0, 5.0, 3.0]);
        assert_eq!(p.treefix_sum(&[0.0; 3]), vec![0.0; 3]);
    }

    #[test]
    fn treefix_matches_pair_scan() {
        let parent = random_parents(40, 3);
        let rt = RootedTree::from_parents(parent.clone(), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f: Vec<f64> = (0..40).map(|_| rng.random_range(-5..6) as f64).collect();
        let g: Vec<f64> = (0..40).map(|_| rng.random_range(-5..6) as f64).collect();
        let fd = rt.treefix_sum(&f);
        for v in 0..40 {
            let brute: f64 = (0..40)
                .filter(|&w| naive_is_ancestor(&parent, v, w))
                .map(|w| f[w])
                .sum();
            assert_eq!(fd[v], brute);
        }
        assert_eq!(fd[0], f.iter().sum::<f64>());
        let gd = rt.treefix_sum(&g);
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let sd = rt.treefix_sum(&sum);
        for v in 0..40 {
            assert_eq!(sd[v], fd[v] + gd[v]);
        }
    }

    #[test]
    fn lca_matches_naive() {
        let parent = random_parents(30, 11);
        let rt = RootedTree::from_parents(parent.clone(), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut edges = Vec::new();
        for _ in 0..80 {
            edges.push((rng.random_range(0..30), rng.random_range(0..30), 1.0));
        }
        for v in 1..30 {
            edges.push((v, parent[v], 1.0));
        }
        let g = WeightedGraph::from_triples(30, &edges).unwrap();
        let lcas = rt.lca_all_edges(&g);
        for (e, &l) in g.edges().iter().zip(&lcas) {
            assert_eq!(l, naive_lca(&parent, e.u, e.v));
            assert!(naive_is_ancestor(&parent, l, e.u) && naive_is_ancestor(&parent, l, e.v));
        }
        for v in 1..30 {
            assert_eq!(rt.lca(v, parent[v]), parent[v]);
        }
        let star = RootedTree::from_parents(vec![NONE, 0, 0], 0).unwrap();
        assert_eq!(star.lca(1, 2), 0);
    }

    #[test]
    fn heavy_first_preorder() {
        let parent = random_parents(60, 5);
        let rt = RootedTree::from_parents(parent, 0).unwrap();
        for v in 0..60 {
            if let Some(&h) = rt.children(v).first() {
                assert_eq!(rt.entry(h), rt.entry(v) + 1);
                assert_eq!(rt.head(h), rt.head(v));
            }
            for &c in rt.children(v).iter().skip(1) {
                assert_eq!(rt.head(c), c);
            }
        }
    }

    #[test]
    fn tree_cut_sides() {
        let t = RootedTree::from_parents(vec![NONE, 0, 0, 1], 0).unwrap();
        assert_eq!(TreeCut::One { v: 1 }.side(&t), vec![false, true, false, true]);
        assert_eq!(
            TreeCut::Incomparable { v: 3, w: 2 }.side(&t),
            vec![false, false, true, true]
        );
        assert_eq!(
            TreeCut::Nested { inner: 3, outer: 1 }.side(&t),
            vec![false, true, false, false]
        );
    }
}
