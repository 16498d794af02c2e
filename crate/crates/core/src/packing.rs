//! Fractional spanning tree packing by repeated minimum spanning trees.
//!
//! Multiplicative weights: edge `e` with relative load `r_e = load/w` has
//! length `exp(η r_e) / w_e`. Each round adds the minimum spanning tree
//! under these lengths with a small weight. Any length function also gives
//! a dual bound `Σ w_e ℓ_e / min_T ℓ(T)` on the maximum packing value, and
//! the loop stops once the rescaled primal is within `1 − ε` of the best
//! dual bound seen.

use std::collections::HashMap;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Edge ids of a spanning tree, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpanningTree {
    pub edges: Vec<usize>,
}

impl SpanningTree {
    pub fn new(mut edges: Vec<usize>) -> Self {
        edges.sort_unstable();
        Self { edges }
    }

    pub fn validate(&self, g: &WeightedGraph) -> Result<()> {
        if self.edges.len() + 1 != g.n() {
            return Err(Error::InvalidTree("tree must have n - 1 edges"));
        }
        let mut dsu = Dsu::new(g.n());
        for &id in &self.edges {
            if id >= g.m() {
                return Err(Error::InvalidTree("edge id out of range"));
            }
            let e = g.edge(id);
            if !dsu.union(e.u, e.v) {
                return Err(Error::InvalidTree("tree contains a cycle"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PackedTree {
    pub tree: SpanningTree,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreePacking {
    pub trees: Vec<PackedTree>,
    /// Total tree weight.
    pub value: f64,
    /// Total weight of trees through each edge.
    pub load: Vec<f64>,
    /// Best dual bound on the maximum packing value.
    pub upper_bound: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl TreePacking {
    pub fn distinct_trees(&self) -> usize {
        self.trees.len()
    }

    /// Largest `load(e) / w(e)` over edges of positive weight.
    pub fn max_relative_load(&self, g: &WeightedGraph) -> f64 {
        g.edges()
            .iter()
            .zip(&self.load)
            .filter(|(e, _)| e.w > 0.0)
            .map(|(e, l)| l / e.w)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PackingConfig {
    pub epsilon: f64,
    /// Defaults to `50 ⌈c̃/ε²⌉ ⌈log₂ n⌉` with `c̃` the smallest weighted
    /// degree measured in units of the smallest edge weight.
    pub max_iters: Option<usize>,
    /// Per-round step as a fraction of `min_{e∈T} w_e / η`.
    pub step_scale: f64,
}

impl PackingConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            max_iters: None,
            step_scale: 1.0,
        }
    }
}

impl Default for PackingConfig {
    fn default() -> Self {
        Self::new(1.0 / 6.0)
    }
}

const ITER_CAP: usize = 5_000_000;

fn default_max_iters(g: &WeightedGraph, eps: f64) -> usize {
    let w_min = g
        .edges()
        .iter()
        .map(|e| e.w)
        .filter(|&w| w > 0.0)
        .fold(f64::INFINITY, f64::min);
    let min_deg = (0..g.n())
        .map(|v| g.weighted_degree(v))
        .fold(f64::INFINITY, f64::min);
    let c_est = (min_deg / w_min).max(1.0);
    let log_n = (g.n().max(2) as f64).log2().ceil();
    let iters = 50.0 * (c_est / (eps * eps)).ceil() * log_n;
    if iters.is_finite() {
        (iters as usize).min(ITER_CAP)
    } else {
        ITER_CAP
    }
}

pub fn pack_trees(g: &WeightedGraph, cfg: &PackingConfig) -> Result<TreePacking> {
    let eps = cfg.epsilon;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "packing epsilon must be in (0, 1/2), got {eps}"
        )));
    }
    if g.n() < 2 {
        return Err(Error::TooSmall);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let m = g.m();
    let max_iters = cfg.max_iters.unwrap_or_else(|| default_max_iters(g, eps));
    let eta = (m.max(2) as f64).ln() / eps;
    let ln_w: Vec<f64> = g.edges().iter().map(|e| e.w.ln()).collect();

    let mut load = vec![0.0; m];
    let mut key = vec![0.0; m];
    let mut trees: Vec<PackedTree> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut value = 0.0;
    let mut best_ub = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        for (id, e) in g.edges().iter().enumerate() {
            key[id] = if e.w > 0.0 {
                eta * load[id] / e.w - ln_w[id]
            } else {
                f64::INFINITY
            };
        }
        let tree = minimum_spanning_tree(g, &key).expect("connected graph has a spanning tree");
        let bottleneck = tree
            .edges
            .iter()
            .map(|&id| g.edge(id).w)
            .fold(f64::INFINITY, f64::min);
        if bottleneck <= 0.0 {
            // some cut consists of zero-weight edges only
            return Ok(TreePacking {
                trees: Vec::new(),
                value: 0.0,
                load,
                upper_bound: 0.0,
                converged: true,
                iterations,
            });
        }

        let kmax = key.iter().copied().filter(|k| k.is_finite()).fold(f64::MIN, f64::max);
        let total: f64 = g
            .edges()
            .iter()
            .zip(&key)
            .filter(|(e, _)| e.w > 0.0)
            .map(|(e, k)| e.w * (k - kmax).exp())
            .sum();
        let tree_len: f64 = tree.edges.iter().map(|&id| (key[id] - kmax).exp()).sum();
        best_ub = best_ub.min(total / tree_len);

        if value > 0.0 {
            let ratio = relative_load(g, &load);
            if value / ratio >= (1.0 - eps) * best_ub {
                converged = true;
                break;
            }
        }

        let step = cfg.step_scale * bottleneck / eta;
        for &id in &tree.edges {
            load[id] += step;
        }
        value += step;
        match index.get(&tree.edges) {
            Some(&i) => trees[i].weight += step,
            None => {
                index.insert(tree.edges.clone(), trees.len());
                trees.push(PackedTree { tree, weight: step });
            }
        }
        iterations += 1;
    }

    let ratio = relative_load(g, &load);
    if ratio > 0.0 {
        let scale = 1.0 / ratio;
        for t in &mut trees {
            t.weight *= scale;
        }
        load.iter_mut().for_each(|l| *l *= scale);
        value *= scale;
    }
    Ok(TreePacking {
        trees,
        value,
        load,
        upper_bound: best_ub,
        converged,
        iterations,
    })
}

fn relative_load(g: &WeightedGraph, load: &[f64]) -> f64 {
    g.edges()
        .iter()
        .zip(load)
        .filter(|(e, _)| e.w > 0.0)
        .map(|(e, l)| l / e.w)
        .fold(0.0, f64::max)
}

/// Draws a tree with probability proportional to its packing weight.
pub fn sample_tree<'a, R: Rng + ?Sized>(p: &'a TreePacking, rng: &mut R) -> Option<&'a SpanningTree> {
    let dist = WeightedIndex::new(p.trees.iter().map(|t| t.weight)).ok()?;
    Some(&p.trees[dist.sample(rng)].tree)
}

pub fn distinct_trees(p: &TreePacking) -> usize {
    p.distinct_trees()
}

/// Kruskal on `key`, ties broken by edge id. `None` if `g` is disconnected.
pub fn minimum_spanning_tree(g: &WeightedGraph, key: &[f64]) -> Option<SpanningTree> {
    let mut ids: Vec<usize> = (0..g.m()).collect();
    ids.sort_unstable_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
    let mut dsu = Dsu::new(g.n());
    let mut edges = Vec::with_capacity(g.n().saturating_sub(1));
    for id in ids {
        let e = g.edge(id);
        if dsu.union(e.u, e.v) {
            edges.push(id);
            if edges.len() + 1 == g.n() {
                break;
            }
        }
    }
    (edges.len() + 1 == g.n()).then(|| SpanningTree::new(edges))
}

pub(crate) struct Dsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cycle(n: usize) -> WeightedGraph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        WeightedGraph::from_triples(n, &e).unwrap()
    }

    fn k4() -> WeightedGraph {
        WeightedGraph::from_triples(
            4,
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)],
        )
        .unwrap()
    }

    fn assert_feasible(g: &WeightedGraph, p: &TreePacking) {
        let mut load = vec![0.0; g.m()];
        for t in &p.trees {
            t.tree.validate(g).unwrap();
            assert!(t.weight > 0.0);
            for &id in &t.tree.edges {
                load[id] += t.weight;
            }
        }
        for (id, e) in g.edges().iter().enumerate() {
            assert!(load[id] <= e.w * (1.0 + 1e-9), "edge {id} overloaded");
            assert!((load[id] - p.load[id]).abs() <= 1e-9 * e.w.max(1.0));
        }
        let sum: f64 = p.trees.iter().map(|t| t.weight).sum();
        assert!((sum - p.value).abs() <= 1e-9 * p.value.max(1.0));
    }

    #[test]
    fn path_packs_itself() {
        let g = WeightedGraph::from_triples(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let p = pack_trees(&g, &PackingConfig::default()).unwrap();
        assert_feasible(&g, &p);
        assert_eq!(p.distinct_trees(), 1);
        assert!((p.value - 1.0).abs() < 1e-12);
        for l in &p.load {
            assert!((l - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn four_cycle_reaches_integral_value() {
        let g = cycle(4);
        let eps = 1.0 / 6.0;
        let p = pack_trees(&g, &PackingConfig::new(eps)).unwrap();
        assert_feasible(&g, &p);
        assert!(p.converged);
        assert!(p.value >= 1.0 - eps);
        // fractional optimum of the 4-cycle: four trees of weight 1/3
        assert!(p.value <= 4.0 / 3.0 + 1e-9);
        assert!(p.upper_bound >= 4.0 / 3.0 - 1e-9);
    }

    #[test]
    fn k4_two_disjoint_trees() {
        let g = k4();
        // oracle: two edge-disjoint spanning trees exist
        let t1 = SpanningTree::new(vec![0, 3, 5]);
        let t2 = SpanningTree::new(vec![1, 2, 4]);
        t1.validate(&g).unwrap();
        t2.validate(&g).unwrap();
        assert!(t1.edges.iter().all(|e| !t2.edges.contains(e)));
        let eps = 1.0 / 6.0;
        let p = pack_trees(&g, &PackingConfig::new(eps)).unwrap();
        assert_feasible(&g, &p);
        assert!(p.value >= (1.0 - eps) * 2.0);
        assert!(p.distinct_trees() <= p.iterations.max(1));
    }

    #[test]
    fn rejects_bad_input() {
        let g = cycle(4);
        assert!(pack_trees(&g, &PackingConfig::new(0.7)).is_err());
        let split = WeightedGraph::from_triples(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(
            pack_trees(&split, &PackingConfig::default()),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn zero_weight_bridge_packs_nothing() {
        let g = WeightedGraph::from_triples(3, &[(0, 1, 1.0), (1, 2, 0.0)]).unwrap();
        let p = pack_trees(&g, &PackingConfig::default()).unwrap();
        assert_eq!(p.value, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_tree(&p, &mut rng).is_none());
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let g = k4();
        let cfg = PackingConfig {
            max_iters: Some(3),
            ..PackingConfig::default()
        };
        let p = pack_trees(&g, &cfg).unwrap();
        assert!(!p.converged);
        assert_eq!(p.iterations, 3);
        assert_feasible(&g, &p);
    }

    fn two_tree_packing(w: &[f64]) -> TreePacking {
        TreePacking {
            trees: w
                .iter()
                .enumerate()
                .map(|(i, &weight)| PackedTree {
                    tree: SpanningTree::new(vec![i]),
                    weight,
                })
                .collect(),
            value: w.iter().sum(),
            load: vec![],
            upper_bound: 0.0,
            converged: true,
            iterations: 0,
        }
    }

    #[test]
    fn sampling_single_tree() {
        let p = two_tree_packing(&[2.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(sample_tree(&p, &mut rng).unwrap().edges, vec![0]);
        }
    }

    #[test]
    fn sampling_proportional_to_weight() {
        let p = two_tree_packing(&[3.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 4000;
        let hits = (0..draws)
            .filter(|_| sample_tree(&p, &mut rng).unwrap().edges == [0])
            .count() as f64;
        let sigma = (draws as f64 * 0.75 * 0.25).sqrt();
        assert!((hits - 0.75 * draws as f64).abs() <= 3.0 * sigma, "hits {hits}");
    }

    #[test]
    fn sampling_uniform_chi_square() {
        let p = two_tree_packing(&[1.0, 1.0, 1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0f64; 4];
        for _ in 0..10_000 {
            counts[sample_tree(&p, &mut rng).unwrap().edges[0]] += 1.0;
        }
        let chi2: f64 = counts.iter().map(|c| (c - 2500.0).powi(2) / 2500.0).sum();
        // 0.999 quantile of chi-square with 3 degrees of freedom
        assert!(chi2 < 16.266, "chi2 = {chi2}");
    }

    #[test]
    fn mst_ties_by_edge_id() {
        let g = cycle(4);
        let t = minimum_spanning_tree(&g, &[1.0; 4]).unwrap();
        assert_eq!(t.edges, vec![0, 1, 2]);
    }
}
