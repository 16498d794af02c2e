//! Exact reference solvers and the counting bound for near-minimum cuts.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Cut, WeightedGraph};

pub const EXHAUSTIVE_LIMIT: usize = 20;

fn check_exhaustive(g: &WeightedGraph) -> Result<()> {
    if g.n() < 2 {
        return Err(Error::TooSmall);
    }
    if g.n() > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            what: "exhaustive search",
            limit: EXHAUSTIVE_LIMIT,
            n: g.n(),
        });
    }
    Ok(())
}

/// Visits every bipartition with vertex 0 on side `false` in Gray-code
/// order, updating the value one vertex flip at a time.
fn gray_walk(g: &WeightedGraph, mut visit: impl FnMut(&[bool], f64)) {
    let n = g.n();
    let mut side = vec![false; n];
    let mut value = 0.0;
    for i in 1u64..(1u64 << (n - 1)) {
        let v = i.trailing_zeros() as usize + 1;
        for &(u, id) in g.incident(v) {
            let w = g.edge(id).w;
            if side[u] == side[v] {
                value += w;
            } else {
                value -= w;
            }
        }
        side[v] = !side[v];
        visit(&side, value);
    }
}

pub fn mincut_exhaustive(g: &WeightedGraph) -> Result<Cut> {
    check_exhaustive(g)?;
    let mut best: Option<(f64, Vec<bool>)> = None;
    gray_walk(g, |side, approx| {
        // incremental values drift for non-integers; recompute near a record
        let bar = best.as_ref().map_or(f64::INFINITY, |(b, _)| *b);
        if approx <= bar + 1e-6 * (1.0 + bar.abs()) {
            let value = g.crossing_weight(side);
            if value < bar {
                best = Some((value, side.to_vec()));
            }
        }
    });
    let (_, side) = best.expect("n >= 2 has a bipartition");
    Cut::from_side(g, side)
}

/// Every bipartition of value at most `α·c`, canonical, sorted by value
/// then membership.
pub fn enumerate_alpha_cuts_exhaustive(g: &WeightedGraph, alpha: f64) -> Result<Vec<Cut>> {
    check_exhaustive(g)?;
    if alpha.is_nan() || alpha < 1.0 {
        return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
    }
    let c = mincut_exhaustive(g)?.value;
    let threshold = alpha * c * (1.0 + 1e-9) + 1e-12;
    let mut out = Vec::new();
    gray_walk(g, |side, approx| {
        if approx <= threshold + 1e-6 * (1.0 + threshold) {
            let value = g.crossing_weight(side);
            if value <= threshold {
                out.push(Cut {
                    side: side.to_vec(),
                    value,
                });
            }
        }
    });
    out.sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.key().cmp(&b.key())));
    Ok(out)
}

#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Stoer–Wagner maximum-adjacency phases with a lazy heap.
pub fn mincut_deterministic(g: &WeightedGraph) -> Result<Cut> {
    let n = g.n();
    if n < 2 {
        return Err(Error::TooSmall);
    }
    let (k, comp) = g.components_by(|_| true);
    if k > 1 {
        let side = comp.iter().map(|&c| c != comp[0]).collect();
        return Cut::from_side(g, side);
    }
    let mut adj: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
    for e in g.edges() {
        *adj[e.u].entry(e.v).or_insert(0.0) += e.w;
        *adj[e.v].entry(e.u).or_insert(0.0) += e.w;
    }
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut best = (f64::INFINITY, Vec::new());
    let mut conn = vec![0.0; n];
    let mut added = vec![false; n];

    while alive.len() > 1 {
        for &v in &alive {
            conn[v] = 0.0;
            added[v] = false;
        }
        let mut heap = BinaryHeap::new();
        heap.push(Key(0.0, alive[0]));
        let (mut prev, mut last) = (usize::MAX, usize::MAX);
        let mut cut_of_phase = 0.0;
        let mut count = 0;
        while let Some(Key(x, v)) = heap.pop() {
            if added[v] || x != conn[v] {
                continue;
            }
            added[v] = true;
            count += 1;
            prev = last;
            last = v;
            cut_of_phase = x;
            for (&u, &w) in &adj[v] {
                if !added[u] {
                    conn[u] += w;
                    heap.push(Key(conn[u], u));
                }
            }
        }
        debug_assert_eq!(count, alive.len());
        if cut_of_phase < best.0 {
            best = (cut_of_phase, members[last].clone());
        }
        // merge `last` into `prev`
        let moved = std::mem::take(&mut members[last]);
        members[prev].extend(moved);
        let edges: Vec<(usize, f64)> = adj[last].drain().collect();
        for (u, w) in edges {
            adj[u].remove(&last);
            if u != prev {
                *adj[prev].entry(u).or_insert(0.0) += w;
                *adj[u].entry(prev).or_insert(0.0) += w;
            }
        }
        alive.retain(|&v| v != last);
    }
    let mut side = vec![false; n];
    for v in best.1 {
        side[v] = true;
    }
    Cut::from_side(g, side)
}

/// `C(n, r)` as a float; exact products for `n ≤ 60`, log-sums above.
pub fn binomial(n: u64, r: u64) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    if n <= 60 {
        let mut acc: u128 = 1;
        for i in 0..r as u128 {
            acc = acc * (n as u128 - i) / (i + 1);
        }
        acc as f64
    } else {
        let ln: f64 = (0..r).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum();
        ln.exp()
    }
}

/// `q_k = Σ_{1≤r≤k} (k+1−r)·C(n,r) / (k+1−2α)`; `None` when the
/// denominator is not positive.
pub fn q_k(n: u64, alpha: f64, k: u64) -> Option<f64> {
    let denom = (k + 1) as f64 - 2.0 * alpha;
    if denom <= 0.0 {
        return None;
    }
    let num: f64 = (1..=k).map(|r| (k + 1 - r) as f64 * binomial(n, r)).sum();
    Some(num / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingBound {
    pub n: u64,
    pub alpha: f64,
    /// `⌊2α⌋`.
    pub k: u64,
    pub q_k: f64,
    pub best_k: u64,
    pub best_q: f64,
}

/// Upper bound on the number of `α`-minimum cuts of any `n`-vertex graph.
pub fn qk_bound(n: u64, alpha: f64) -> Result<CountingBound> {
    if alpha.is_nan() || alpha < 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
    }
    if n < 2 {
        return Err(Error::TooSmall);
    }
    let k = (2.0 * alpha).floor() as u64;
    let q = q_k(n, alpha, k).expect("k + 1 > 2α");
    let (mut best_k, mut best_q) = (k, q);
    for j in k + 1..=k + 8 {
        let x = q_k(n, alpha, j).expect("j + 1 > 2α");
        if x < best_q {
            best_k = j;
            best_q = x;
        }
    }
    Ok(CountingBound {
        n,
        alpha,
        k,
        q_k: q,
        best_k,
        best_q,
    })
}

/// Number of cuts of value at most `2α` in the unit `n`-cycle: an even
/// number of its edges, at most `2α` of them.
pub fn cycle_alpha_cut_count(n: u64, alpha: f64) -> f64 {
    let top = (2.0 * alpha).floor() as u64;
    (1..=top / 2).map(|j| binomial(n, 2 * j)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessWitness {
    pub k: u64,
    pub q_k: f64,
    /// `n_r` at index `r − 1`, for `r = 1 ..= k + 1`.
    pub n_r: Vec<f64>,
    /// Ratio obtained with weights `w_r = 1 + k − r`.
    pub ratio: f64,
    pub total_trees: f64,
    pub total_edges: f64,
}

/// Smallest `k ≥ ⌊2α⌋` with `q_k ≤ q_{k+1}`. Past `k = n` the sequence is
/// monotone, so a search that gets there without turning up finds none:
/// `q_k` then decreases towards `2ⁿ − 1` forever.
pub fn minimizing_k(n: u64, alpha: f64) -> Option<(u64, f64)> {
    let mut k = (2.0 * alpha).floor() as u64;
    let mut q = q_k(n, alpha, k)?;
    loop {
        let next = q_k(n, alpha, k + 1)?;
        if q <= next {
            return Some((k, q));
        }
        if k > n + 1 {
            return None;
        }
        k += 1;
        q = next;
    }
}

/// Tree-count profile against which the counting argument cannot do better
/// than `q_k`, built for a minimizing `k`. All constraints are checked.
pub fn tightness_witness(n: u64, alpha: f64, c: f64) -> Result<TightnessWitness> {
    if c.is_nan() || c <= 0.0 || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("cut value must be positive, got {c}")));
    }
    qk_bound(n, alpha)?;
    let (k, q) = minimizing_k(n, alpha).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "q_k has no minimizing k for n = {n}, alpha = {alpha}; the bound is trivial here"
        ))
    })?;
    let scale = c / (2.0 * q);
    let mut n_r: Vec<f64> = (1..=k).map(|r| scale * binomial(n, r)).collect();
    let head: f64 = (1..=k).map(|r| binomial(n, r)).sum();
    n_r.push(c / 2.0 * (1.0 - head / q));

    let total_trees: f64 = n_r.iter().sum();
    let total_edges: f64 = n_r.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
    let weighted_deg: f64 = (1..=k).map(|r| (1 + k - r) as f64 * binomial(n, r)).sum();
    let weighted_n: f64 = (1..=k).map(|r| (1 + k - r) as f64 * n_r[r as usize - 1]).sum();
    let ratio = c / 2.0 * weighted_deg / weighted_n;

    let tol = 1e-9;
    let close = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
    let fail = |what: &str| Err(Error::Internal(format!("witness violates {what} (n={n}, alpha={alpha})")));
    if !close(total_trees, c / 2.0) {
        return fail("tree count");
    }
    if total_edges > alpha * c * (1.0 + tol) {
        return fail("edge count");
    }
    if n_r.iter().any(|&x| x < -tol * c) {
        return fail("non-negativity");
    }
    for (i, &x) in n_r.iter().enumerate() {
        if x > scale * binomial(n, i as u64 + 1) * (1.0 + tol) {
            return fail("per-size cap");
        }
    }
    if !close(ratio, q) {
        return fail("ratio");
    }
    Ok(TightnessWitness {
        k,
        q_k: q,
        n_r,
        ratio,
        total_trees,
        total_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cycle(n: usize) -> WeightedGraph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        WeightedGraph::from_triples(n, &e).unwrap()
    }

    fn random_graph(n: usize, seed: u64, weighted: bool) -> WeightedGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<Edge> = (1..n).map(|v| Edge::new(v, rng.random_range(0..v), 1.0)).collect();
        for _ in 0..rng.random_range(0..2 * n) {
            let w = if weighted { rng.random_range(0.1..5.0) } else { 1.0 };
            edges.push(Edge::new(rng.random_range(0..n), rng.random_range(0..n), w));
        }
        WeightedGraph::new(n, edges).unwrap()
    }

    #[test]
    fn small_exhaustive_cases() {
        assert_eq!(mincut_exhaustive(&cycle(3)).unwrap().value, 2.0);
        let path = WeightedGraph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(mincut_exhaustive(&path).unwrap().value, 1.0);
        let mut k4 = Vec::new();
        for u in 0..4 {
            for v in u + 1..4 {
                k4.push((u, v, 1.0));
            }
        }
        assert_eq!(mincut_exhaustive(&WeightedGraph::from_triples(4, &k4).unwrap()).unwrap().value, 3.0);
        assert!(matches!(mincut_exhaustive(&cycle(21)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn deterministic_agrees_with_exhaustive() {
        for seed in 0..500 {
            let n = 2 + (seed as usize % 11);
            let g = random_graph(n, seed, seed % 2 == 0);
            let a = mincut_exhaustive(&g).unwrap();
            let b = mincut_deterministic(&g).unwrap();
            assert!((a.value - b.value).abs() < 1e-9, "seed {seed}: {} vs {}", a.value, b.value);
            assert_eq!(b.value, g.cut_value(&b.side).unwrap());
        }
    }

    #[test]
    fn deterministic_known_values() {
        assert_eq!(mincut_deterministic(&cycle(30)).unwrap().value, 2.0);
        let mut e = Vec::new();
        for base in [0, 5] {
            for u in 0..5 {
                for v in u + 1..5 {
                    e.push((base + u, base + v, 1.0));
                }
            }
        }
        e.push((2, 7, 0.5));
        let g = WeightedGraph::from_triples(10, &e).unwrap();
        let c = mincut_deterministic(&g).unwrap();
        assert_eq!(c.value, 0.5);
        assert_eq!(c.side_size(), 5);
    }

    #[test]
    fn cycle_enumeration_counts() {
        assert_eq!(enumerate_alpha_cuts_exhaustive(&cycle(3), 1.0).unwrap().len(), 3);
        assert_eq!(enumerate_alpha_cuts_exhaustive(&cycle(6), 1.0).unwrap().len(), 15);
        assert_eq!(enumerate_alpha_cuts_exhaustive(&cycle(6), 2.0).unwrap().len(), 30);
        for n in [6u64, 8, 10] {
            for alpha in [1.0, 1.5, 2.0, 2.5] {
                let got = enumerate_alpha_cuts_exhaustive(&cycle(n as usize), alpha).unwrap().len();
                assert_eq!(got as f64, cycle_alpha_cut_count(n, alpha));
            }
        }
    }

    #[test]
    fn qk_examples() {
        let b = qk_bound(10, 1.0).unwrap();
        assert_eq!((b.k, b.q_k), (2, 65.0));
        let b = qk_bound(10, 1.5).unwrap();
        assert_eq!((b.k, b.q_k), (3, 240.0));
        assert!(b.best_q <= b.q_k);
        assert!(qk_bound(10, 0.9).is_err());
    }

    #[test]
    fn binomial_regimes() {
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(60, 30), 118264581564861424.0);
        let direct = 61.0 * 60.0 / 2.0;
        assert!((binomial(61, 2) - direct).abs() < 1e-9 * direct);
        assert_eq!(binomial(5, 7), 0.0);
    }

    #[test]
    fn counting_bound_holds() {
        for seed in 0..60 {
            let n = 3 + (seed as usize % 10);
            let g = random_graph(n, seed + 900, seed % 3 == 0);
            for alpha in [1.0, 1.5, 2.0] {
                let count = enumerate_alpha_cuts_exhaustive(&g, alpha).unwrap().len();
                assert!(count as f64 <= qk_bound(n as u64, alpha).unwrap().q_k);
            }
        }
    }

    #[test]
    fn witness_sweep() {
        let w = tightness_witness(10, 1.0, 2.0).unwrap();
        assert!((w.total_trees - 1.0).abs() < 1e-12);
        for n in 5..=50 {
            for alpha in [1.0, 1.25, 1.5, 2.0] {
                let Ok(w) = tightness_witness(n, alpha, 2.0) else {
                    // only tiny n, where q_k keeps falling towards 2ⁿ − 1
                    assert!(minimizing_k(n, alpha).is_none());
                    assert!((n as f64) < 4.0 * alpha + 1.0, "n={n} alpha={alpha}");
                    continue;
                };
                assert!(w.n_r.iter().all(|&x| x >= -1e-12));
                assert!((w.total_edges - alpha * 2.0).abs() < 1e-9 * w.total_edges.max(1.0));
            }
        }
    }
}
