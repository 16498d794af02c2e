//! Cuts that 1-respect a rooted spanning tree.
//!
//! `C(v↓) = δ↓(v) − 2ρ↓(v)`: the treefix of weighted degrees counts every
//! edge leaving the subtree once and every edge inside it twice, and an
//! edge lies inside `v↓` exactly when its LCA does.

use crate::graph::WeightedGraph;
use crate::rooted_tree::{RootedTree, NONE};

#[derive(Debug, Clone)]
pub struct OneRespectTable {
    /// `C(v↓)`; `+∞` at the root.
    pub cut: Vec<f64>,
    /// `δ↓(v)`.
    pub degree_down: Vec<f64>,
    /// `ρ↓(v)`.
    pub lca_weight_down: Vec<f64>,
    pub min_value: f64,
    /// Vertex whose subtree attains `min_value`, if `n > 1`.
    pub argmin: Option<usize>,
}

pub fn one_respect_cuts(rt: &RootedTree, g: &WeightedGraph) -> OneRespectTable {
    let lcas = rt.lca_all_edges(g);
    one_respect_with_lcas(rt, g, &lcas)
}

pub(crate) fn one_respect_with_lcas(
    rt: &RootedTree,
    g: &WeightedGraph,
    lcas: &[usize],
) -> OneRespectTable {
    let n = g.n();
    let mut degree = vec![0.0; n];
    let mut rho = vec![0.0; n];
    for (e, &l) in g.edges().iter().zip(lcas) {
        degree[e.u] += e.w;
        degree[e.v] += e.w;
        rho[l] += e.w;
    }
    let degree_down = rt.treefix_sum(&degree);
    let lca_weight_down = rt.treefix_sum(&rho);
    let mut cut: Vec<f64> = degree_down
        .iter()
        .zip(&lca_weight_down)
        .map(|(d, r)| d - 2.0 * r)
        .collect();
    cut[rt.root()] = f64::INFINITY;

    let mut min_value = f64::INFINITY;
    let mut argmin = None;
    for &v in rt.preorder() {
        if cut[v] < min_value {
            min_value = cut[v];
            argmin = Some(v);
        }
    }
    OneRespectTable {
        cut,
        degree_down,
        lca_weight_down,
        min_value,
        argmin,
    }
}

/// Recurrence for a path tree `order[0]` (root) .. `order[n-1]` (leaf):
/// moving `v_i` below the cut adds its edges to ancestors and removes its
/// edges to descendants. Returns `C(v↓)` indexed by vertex, `+∞` at the root.
pub fn path_one_respect(g: &WeightedGraph, order: &[usize]) -> Vec<f64> {
    let n = g.n();
    assert_eq!(order.len(), n, "path must visit every vertex");
    let mut pos = vec![NONE; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut up = vec![0.0; n];
    let mut down = vec![0.0; n];
    for e in g.edges() {
        let (a, b) = (pos[e.u], pos[e.v]);
        let (hi, lo) = if a < b { (e.u, e.v) } else { (e.v, e.u) };
        // `lo` is deeper: the edge goes up from lo and down from hi
        up[lo] += e.w;
        down[hi] += e.w;
    }
    let mut cut = vec![f64::INFINITY; n];
    let mut acc = 0.0;
    for i in (1..n).rev() {
        let v = order[i];
        acc = if i == n - 1 { up[v] } else { acc + up[v] - down[v] };
        cut[v] = acc;
    }
    cut
}
