//! Minimum cut 2-respecting a tree in `O(m log² n)`.
//!
//! Per round: for each bough (a leaf-upward path of vertices with at most
//! one child) run MinPrecut leaf to top over path markers for the
//! incomparable case, and a second sweep for the case where the upper edge
//! lies on the bough's root path. Then contract every bough into the vertex
//! it hangs from; the leaf count at least halves.
//!
//! `precut(v, w) = C(w↓) − 2 w(v↓, w↓)` for `w` incomparable to `v`, and
//! `C(v↓ ∪ w↓) = C(v↓) + precut(v, w)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ContractionMap, Cut, WeightedGraph};
use crate::path_aggregate::PathAggregator;
use crate::respect1::{one_respect_cuts, OneRespectTable};
use crate::respect2_dense::two_respect_dense;
use crate::rooted_tree::{RootedTree, TreeCut, NONE};

/// Leaf-first vertices of a bough.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bough {
    pub vertices: Vec<usize>,
    /// Graph edges incident to the bough, counted per endpoint.
    pub degree: usize,
}

impl Bough {
    pub fn top(&self) -> usize {
        *self.vertices.last().expect("bough is never empty")
    }
}

/// One bough per leaf. Each climbs while its parent has a single child and
/// is not the root.
pub fn boughs(rt: &RootedTree, g: &WeightedGraph) -> Vec<Bough> {
    let mut out = Vec::new();
    for &leaf in rt.preorder() {
        if leaf == rt.root() || !rt.is_leaf(leaf) {
            continue;
        }
        let mut vertices = vec![leaf];
        let mut cur = leaf;
        loop {
            let p = rt.parent(cur);
            if p == rt.root() || rt.children(p).len() != 1 {
                break;
            }
            vertices.push(p);
            cur = p;
        }
        let degree = vertices.iter().map(|&v| g.incident(v).len()).sum();
        out.push(Bough { vertices, degree });
    }
    out
}

/// Markers over one tree, holding `C(w↓)` between boughs.
pub struct PrecutState<'a> {
    g: &'a WeightedGraph,
    rt: &'a RootedTree,
    pub one: OneRespectTable,
    agg: PathAggregator<'a>,
}

impl<'a> PrecutState<'a> {
    pub fn new(rt: &'a RootedTree, g: &'a WeightedGraph) -> Self {
        let one = one_respect_cuts(rt, g);
        let agg = PathAggregator::new(rt, &one.cut);
        Self { g, rt, one, agg }
    }

    pub fn marker(&mut self, w: usize) -> f64 {
        self.agg.marker(w)
    }

    pub fn touches(&self) -> u64 {
        self.agg.touches()
    }

    /// Moves the markers from `precut(child, ·)` to `precut(v, ·)` and
    /// returns the smallest marker on a neighbour's root path with its
    /// vertex; `+∞` without a candidate.
    pub fn local_update(&mut self, v: usize) -> (f64, usize) {
        self.agg.add_path(v, f64::INFINITY);
        for &(u, id) in self.g.incident(v) {
            self.agg.add_path(u, -2.0 * self.g.edge(id).w);
        }
        let mut best = (f64::INFINITY, NONE);
        for &(u, _) in self.g.incident(v) {
            let cand = self.agg.min_path(u);
            if cand.0 < best.0 {
                best = cand;
            }
        }
        best
    }

    /// `minprecut(v)` with its witness for every bough vertex, leaf first.
    /// Markers are restored afterwards.
    pub fn min_precut_bough(&mut self, bough: &Bough) -> Vec<(f64, usize)> {
        self.agg.checkpoint();
        let mut out: Vec<(f64, usize)> = Vec::with_capacity(bough.vertices.len());
        for &v in &bough.vertices {
            let here = self.local_update(v);
            let carried = out.last().copied().unwrap_or((f64::INFINITY, NONE));
            out.push(if carried.0 <= here.0 { carried } else { here });
        }
        self.agg.rollback();
        out
    }

    /// For each bough vertex `v`, the smallest `C(w↓ − v↓)` over proper
    /// non-root ancestors `w`, with `w`. Markers are restored afterwards.
    pub fn comparable_pass(&mut self, bough: &Bough) -> Vec<(f64, usize)> {
        self.agg.checkpoint();
        let mut out = Vec::with_capacity(bough.vertices.len());
        for &v in &bough.vertices {
            for &(u, id) in self.g.incident(v) {
                self.agg.add_path(u, 2.0 * self.g.edge(id).w);
            }
            let p = self.rt.parent(v);
            if p == self.rt.root() {
                out.push((f64::INFINITY, NONE));
                continue;
            }
            // markers now hold C(w↓) + 2 w(v↓, w↓), edges inside v↓ twice
            let (x, w) = self.agg.min_path(p);
            let value = x - self.one.cut[v] - 4.0 * self.one.lca_weight_down[v];
            out.push((value, w));
        }
        self.agg.rollback();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SparseConfig {
    /// Finish with the dense table once the contracted tree is small
    /// enough that `n'² ≤ m`.
    pub dense_cutover: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseStats {
    pub rounds: usize,
    pub boughs: usize,
    /// Leaf count at the start of each round.
    pub leaves: Vec<usize>,
    pub aggregator_touches: u64,
    /// Vertices left when the dense table took over.
    pub cutover_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOutcome {
    pub cut: Cut,
    /// Crossing tree edges in original vertex ids.
    pub tree_cut: TreeCut,
    pub stats: SparseStats,
}

struct Best {
    value: f64,
    cut: Option<TreeCut>,
    side: Vec<bool>,
}

impl Best {
    fn offer(&mut self, value: f64, cut: TreeCut, rt: &RootedTree, lift: &ContractionMap, orig: &[usize]) {
        if value < self.value {
            self.value = value;
            self.side = lift.lift_side(&cut.side(rt));
            self.cut = Some(cut.map(|x| orig[x]));
        }
    }
}

pub fn two_respect_sparse(rt: &RootedTree, g: &WeightedGraph) -> Result<SparseOutcome> {
    two_respect_sparse_with(rt, g, SparseConfig::default())
}

pub fn two_respect_sparse_with(
    rt: &RootedTree,
    g: &WeightedGraph,
    cfg: SparseConfig,
) -> Result<SparseOutcome> {
    let n0 = g.n();
    if n0 < 2 {
        return Err(Error::TooSmall);
    }
    if rt.n() != n0 {
        return Err(Error::InvalidTree("tree and graph differ in size"));
    }
    let m0 = g.m();
    let mut stats = SparseStats::default();
    let mut best = Best {
        value: f64::INFINITY,
        cut: None,
        side: Vec::new(),
    };
    // current → original: contraction chain and representative vertex
    let mut lift = ContractionMap::identity(n0);
    let mut orig: Vec<usize> = (0..n0).collect();
    let mut cur_g = g.clone();
    let mut cur_t = rt.clone();

    while cur_g.n() > 1 {
        let n = cur_g.n();
        if cfg.dense_cutover && n * n <= m0 {
            stats.cutover_at = Some(n);
            let table = two_respect_dense(&cur_t, &cur_g, usize::MAX)?;
            if let Some(c) = table.argmin {
                best.offer(table.min_value, c, &cur_t, &lift, &orig);
            }
            break;
        }
        let bs = boughs(&cur_t, &cur_g);
        stats.rounds += 1;
        stats.boughs += bs.len();
        stats.leaves.push(bs.len());
        {
            let mut state = PrecutState::new(&cur_t, &cur_g);
            if stats.rounds == 1 {
                if let Some(v) = state.one.argmin {
                    best.offer(state.one.min_value, TreeCut::One { v }, &cur_t, &lift, &orig);
                }
            }
            for b in &bs {
                let pre = state.min_precut_bough(b);
                for (&v, &(x, w)) in b.vertices.iter().zip(&pre) {
                    if w != NONE {
                        let value = state.one.cut[v] + x;
                        best.offer(value, TreeCut::Incomparable { v, w }, &cur_t, &lift, &orig);
                    }
                }
                let cmp = state.comparable_pass(b);
                for (&v, &(x, w)) in b.vertices.iter().zip(&cmp) {
                    if w != NONE {
                        best.offer(x, TreeCut::Nested { inner: v, outer: w }, &cur_t, &lift, &orig);
                    }
                }
            }
            stats.aggregator_touches += state.touches();
        }

        // contract every bough into the vertex it hangs from
        let mut in_bough = vec![false; n];
        for b in &bs {
            for &v in &b.vertices {
                in_bough[v] = true;
            }
        }
        let mut label = vec![NONE; n];
        let mut next_orig = Vec::new();
        for v in 0..n {
            if !in_bough[v] {
                label[v] = next_orig.len();
                next_orig.push(orig[v]);
            }
        }
        let mut map = label.clone();
        for b in &bs {
            let attach = label[cur_t.parent(b.top())];
            for &v in &b.vertices {
                map[v] = attach;
            }
        }
        let k = next_orig.len();
        let mut parent = vec![NONE; k];
        for v in 0..n {
            if !in_bough[v] && v != cur_t.root() {
                parent[label[v]] = label[cur_t.parent(v)];
            }
        }
        let step = ContractionMap::new(map)?;
        let next_g = cur_g.contract(&step, true)?;
        let next_t = RootedTree::from_parents(parent, label[cur_t.root()])?;
        let next_leaves = if k > 1 { next_t.leaf_count() } else { 0 };
        if 2 * next_leaves > bs.len() {
            return Err(Error::Internal(format!(
                "bough contraction left {next_leaves} of {} leaves",
                bs.len()
            )));
        }
        lift = lift.then(&step)?;
        orig = next_orig;
        cur_g = next_g;
        cur_t = next_t;
    }

    let tree_cut = best
        .cut
        .ok_or_else(|| Error::Internal("no 2-respecting cut found".into()))?;
    let cut = Cut::from_side(g, best.side)?;
    Ok(SparseOutcome { cut, tree_cut, stats })
}
