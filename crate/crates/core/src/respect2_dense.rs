//! All cuts that 2-respect a tree in `O(n²)`, and a compact store of the
//! near-minimum cuts found across several trees.
//!
//! With `X[v][w] = w(v↓, w↓)` obtained from two rounds of treefix sums,
//!
//! * incomparable `v`, `w`: `C(v↓ ∪ w↓) = C(v↓) + C(w↓) − 2 X[v][w]`
//! * `v` strictly below `w`: `C(w↓ − v↓) = C(w↓) − C(v↓) + 2 (X[v][w] − 2ρ↓(v))`

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{side_key, WeightedGraph};
use crate::respect1::{one_respect_with_lcas, OneRespectTable};
use crate::rooted_tree::{RootedTree, TreeCut, NONE};

pub const DEFAULT_DENSE_LIMIT: usize = 5000;

/// Triple-edge enumeration (for `⌊2α⌋ = 3`) is limited to this many
/// vertices.
pub const TRIPLE_LIMIT: usize = 300;

/// Cut values for every pair of tree edges, each edge named by its lower
/// endpoint. Pairs are stored once in a packed triangle; whether an entry
/// is the incomparable or the nested case follows from the tree.
#[derive(Debug, Clone)]
pub struct PairCutTable {
    n: usize,
    root: usize,
    pub one: OneRespectTable,
    values: Vec<f64>,
    /// Minimum over pairs and single edges.
    pub min_value: f64,
    pub argmin: Option<TreeCut>,
}

#[inline]
fn tri(a: usize, b: usize) -> usize {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi * (hi - 1) / 2 + lo
}

impl PairCutTable {
    /// Value of the cut crossing the parent edges of `v` and `w`; `+∞` when
    /// `v == w` or either is the root.
    pub fn pair_value(&self, v: usize, w: usize) -> f64 {
        if v == w || v == self.root || w == self.root {
            f64::INFINITY
        } else {
            self.values[tri(v, w)]
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// All finite pair entries as `(cut, value)`.
    pub fn pairs<'a>(&'a self, rt: &'a RootedTree) -> impl Iterator<Item = (TreeCut, f64)> + 'a {
        (0..self.n).flat_map(move |a| {
            (0..a).filter_map(move |b| {
                let x = self.pair_value(a, b);
                x.is_finite().then(|| (pair_cut(rt, a, b), x))
            })
        })
    }
}

/// The tree cut selected by the parent edges of distinct non-root `v`, `w`.
pub fn pair_cut(rt: &RootedTree, v: usize, w: usize) -> TreeCut {
    if rt.is_ancestor(w, v) {
        TreeCut::Nested { inner: v, outer: w }
    } else if rt.is_ancestor(v, w) {
        TreeCut::Nested { inner: w, outer: v }
    } else {
        TreeCut::Incomparable { v: v.min(w), w: v.max(w) }
    }
}

/// `X[v·n + w] = w(v↓, w↓)`.
fn subtree_cross_weights(rt: &RootedTree, g: &WeightedGraph) -> Vec<f64> {
    let n = g.n();
    let mut x = vec![0.0; n * n];
    for e in g.edges() {
        x[e.u * n + e.v] += e.w;
        x[e.v * n + e.u] += e.w;
    }
    let order = rt.preorder();
    // treefix along each row: X[r][w] = w(r, w↓)
    for r in 0..n {
        let row = &mut x[r * n..(r + 1) * n];
        for &c in order.iter().rev() {
            let p = rt.parent(c);
            if p != NONE {
                row[p] += row[c];
            }
        }
    }
    // treefix across rows: X[v][w] = w(v↓, w↓)
    for &c in order.iter().rev() {
        let p = rt.parent(c);
        if p != NONE {
            let (src, dst) = (c * n, p * n);
            for k in 0..n {
                x[dst + k] += x[src + k];
            }
        }
    }
    x
}

pub fn two_respect_dense(rt: &RootedTree, g: &WeightedGraph, limit: usize) -> Result<PairCutTable> {
    let n = g.n();
    if n > limit {
        return Err(Error::TooLarge {
            what: "dense 2-respect table",
            limit,
            n,
        });
    }
    let lcas = rt.lca_all_edges(g);
    let one = one_respect_with_lcas(rt, g, &lcas);
    let x = subtree_cross_weights(rt, g);
    let root = rt.root();
    let c = &one.cut;
    let rho = &one.lca_weight_down;

    let mut values = vec![f64::INFINITY; n * n.saturating_sub(1) / 2];
    let mut min_value = one.min_value;
    let mut argmin = one.argmin.map(|v| TreeCut::One { v });
    for a in 0..n {
        if a == root {
            continue;
        }
        for b in 0..a {
            if b == root {
                continue;
            }
            let val = if rt.is_ancestor(b, a) {
                c[b] - c[a] + 2.0 * (x[a * n + b] - 2.0 * rho[a])
            } else if rt.is_ancestor(a, b) {
                c[a] - c[b] + 2.0 * (x[b * n + a] - 2.0 * rho[b])
            } else {
                c[a] + c[b] - 2.0 * x[a * n + b]
            };
            values[tri(a, b)] = val;
            if val < min_value {
                min_value = val;
                argmin = Some(pair_cut(rt, a, b));
            }
        }
    }
    Ok(PairCutTable {
        n,
        root,
        one,
        values,
        min_value,
        argmin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentedCut {
    pub value: f64,
    /// Canonical membership bitstring, vertex 0 first and always `0`.
    pub side: String,
    pub tree_id: usize,
    /// Lower endpoints of the crossing tree edges, ascending.
    pub tree_edges: Vec<usize>,
}

/// Near-minimum cuts recorded per tree, indexed by partition.
#[derive(Debug, Clone)]
pub struct CutRepresentation {
    pub alpha: f64,
    /// Smallest cut value seen across all trees.
    pub best_value: f64,
    /// Edges per recorded cut are at most this many.
    pub max_edges: usize,
    pub cuts: Vec<RepresentedCut>,
    index: HashMap<Vec<u64>, usize>,
    per_tree: Vec<HashMap<Vec<usize>, usize>>,
    parents: Vec<Vec<usize>>,
}

impl CutRepresentation {
    /// Stored value of the partition `side`, by hashing its canonical form.
    pub fn lookup(&self, side: &[bool]) -> Option<f64> {
        self.index.get(&side_key(side)).map(|&i| self.cuts[i].value)
    }

    /// Same answer as [`Self::lookup`], found by checking in each tree
    /// whether few enough tree edges cross `side`.
    pub fn lookup_by_trees(&self, side: &[bool]) -> Option<f64> {
        for (parent, table) in self.parents.iter().zip(&self.per_tree) {
            let crossing: Vec<usize> = (0..parent.len())
                .filter(|&v| parent[v] != NONE && side[v] != side[parent[v]])
                .take(self.max_edges + 1)
                .collect();
            if crossing.is_empty() || crossing.len() > self.max_edges {
                continue;
            }
            if let Some(&i) = table.get(&crossing) {
                return Some(self.cuts[i].value);
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.cuts).expect("cuts serialize")
    }
}

fn bits(side: &[bool]) -> String {
    let flip = side.first() == Some(&true);
    side.iter().map(|&b| if b != flip { '1' } else { '0' }).collect()
}

struct Candidate {
    value: f64,
    side: Vec<bool>,
    tree_id: usize,
    edges: Vec<usize>,
}

/// Records every cut crossing at most `⌊2α⌋` edges of some tree whose value
/// is at most `α` times the best value found. Pairs suffice for `α < 3/2`;
/// `⌊2α⌋ = 3` adds edge triples and requires `n ≤ 300`.
pub fn enumerate_near_min(
    g: &WeightedGraph,
    trees: &[RootedTree],
    alpha: f64,
) -> Result<CutRepresentation> {
    if alpha.is_nan() || alpha < 1.0 {
        return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
    }
    let max_edges = (2.0 * alpha).floor() as usize;
    if max_edges > 3 {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} needs {max_edges}-edge sets; at most 3 are supported"
        )));
    }
    if max_edges == 3 && g.n() > TRIPLE_LIMIT {
        return Err(Error::TooLarge {
            what: "triple-edge enumeration",
            limit: TRIPLE_LIMIT,
            n: g.n(),
        });
    }
    let tol = 1.0 + 1e-9;
    let mut best = f64::INFINITY;
    let mut found: Vec<Candidate> = Vec::new();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();

    for (tree_id, rt) in trees.iter().enumerate() {
        let table = two_respect_dense(rt, g, DEFAULT_DENSE_LIMIT)?;
        best = best.min(table.min_value);
        let threshold = alpha * best * tol;
        let mut consider = |value: f64, side: Vec<bool>, edges: Vec<usize>| {
            if value > threshold {
                return;
            }
            let key = side_key(&side);
            if seen.contains_key(&key) {
                return;
            }
            seen.insert(key, found.len());
            found.push(Candidate {
                value,
                side,
                tree_id,
                edges,
            });
        };
        for v in 0..g.n() {
            let x = table.one.cut[v];
            if x.is_finite() {
                consider(x, rt.subtree_side(v), vec![v]);
            }
        }
        for (cut, x) in table.pairs(rt) {
            if x <= threshold {
                consider(x, cut.side(rt), cut.tree_edges());
            }
        }
        if max_edges == 3 {
            for (value, edges) in triple_cuts(rt, g, &table, threshold) {
                let mut side = rt.subtree_side(edges[0]);
                for &v in &edges[1..] {
                    for &x in &rt.preorder()[rt.entry(v)..rt.exit(v)] {
                        side[x] = !side[x];
                    }
                }
                consider(value, side, edges);
            }
        }
    }

    // final filter against the overall best
    let threshold = alpha * best * tol;
    let mut rep = CutRepresentation {
        alpha,
        best_value: best,
        max_edges,
        cuts: Vec::new(),
        index: HashMap::new(),
        per_tree: vec![HashMap::new(); trees.len()],
        parents: trees.iter().map(|t| t.parents().to_vec()).collect(),
    };
    for c in found.into_iter().filter(|c| c.value <= threshold) {
        let i = rep.cuts.len();
        rep.index.insert(side_key(&c.side), i);
        let mut edges = c.edges;
        edges.sort_unstable();
        rep.per_tree[c.tree_id].insert(edges.clone(), i);
        rep.cuts.push(RepresentedCut {
            value: c.value,
            side: bits(&c.side),
            tree_id: c.tree_id,
            tree_edges: edges,
        });
    }
    Ok(rep)
}

/// Cuts crossing exactly three tree edges `a < b < c` with value at most
/// `threshold`. For a fixed pair with side `S = a↓ ⊕ b↓`, reweighting each
/// edge by whether it crosses `S` turns `w(cross S ∧ cross c↓)` into a
/// 1-respect computation over all `c` at once.
fn triple_cuts(
    rt: &RootedTree,
    g: &WeightedGraph,
    table: &PairCutTable,
    threshold: f64,
) -> Vec<(f64, Vec<usize>)> {
    let n = g.n();
    let root = rt.root();
    let lcas = rt.lca_all_edges(g);
    let mut out = Vec::new();
    let mut deg = vec![0.0; n];
    let mut rho = vec![0.0; n];
    for a in 0..n {
        if a == root {
            continue;
        }
        for b in a + 1..n {
            if b == root {
                continue;
            }
            let pair = table.pair_value(a, b);
            deg.iter_mut().for_each(|x| *x = 0.0);
            rho.iter_mut().for_each(|x| *x = 0.0);
            for (e, &l) in g.edges().iter().zip(&lcas) {
                let in_u = rt.is_ancestor(a, e.u) ^ rt.is_ancestor(b, e.u);
                let in_v = rt.is_ancestor(a, e.v) ^ rt.is_ancestor(b, e.v);
                if in_u != in_v {
                    deg[e.u] += e.w;
                    deg[e.v] += e.w;
                    rho[l] += e.w;
                }
            }
            let dd = rt.treefix_sum(&deg);
            let rd = rt.treefix_sum(&rho);
            for c in b + 1..n {
                if c == root {
                    continue;
                }
                let both = dd[c] - 2.0 * rd[c];
                let value = pair + table.one.cut[c] - 2.0 * both;
                if value <= threshold {
                    out.push((value, vec![a, b, c]));
                }
            }
        }
    }
    out
}
