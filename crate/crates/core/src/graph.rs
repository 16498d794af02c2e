//! Weighted undirected graphs, cuts, and contraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, w: f64) -> Self {
        Self { u, v, w }
    }

    /// The endpoint opposite `x`.
    #[inline]
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected multigraph with non-negative real edge weights.
///
/// Self-loops are dropped on construction. Parallel edges are kept until
/// [`WeightedGraph::merge_parallel`] or a merging contraction folds them.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut kept = Vec::new();
        for e in edges {
            if e.u >= n {
                return Err(Error::VertexOutOfRange { vertex: e.u, n });
            }
            if e.v >= n {
                return Err(Error::VertexOutOfRange { vertex: e.v, n });
            }
            if !e.w.is_finite() || e.w < 0.0 {
                return Err(Error::InvalidWeight { u: e.u, v: e.v, w: e.w });
            }
            if e.u != e.v {
                kept.push(e);
            }
        }
        Ok(Self::from_clean(n, kept))
    }

    /// Convenience constructor from `(u, v, w)` triples.
    pub fn from_triples(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(n, triples.iter().map(|&(u, v, w)| Edge::new(u, v, w)))
    }

    fn from_clean(n: usize, edges: Vec<Edge>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        Self { n, edges, adj }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    /// Incident `(neighbor, edge id)` pairs of `v`.
    #[inline]
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|&(_, id)| self.edges[id].w).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn min_edge_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.w).reduce(f64::min)
    }

    /// Connected components restricted to edges accepted by `keep`.
    pub fn components_by(&self, keep: impl Fn(&Edge) -> bool) -> (usize, Vec<usize>) {
        let mut comp = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            stack.push(s);
            while let Some(x) = stack.pop() {
                for &(y, id) in &self.adj[x] {
                    if comp[y] == usize::MAX && keep(&self.edges[id]) {
                        comp[y] = count;
                        stack.push(y);
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.components_by(|_| true).0 == 1
    }

    /// Total weight of edges whose endpoints lie on different sides.
    pub fn cut_value(&self, side: &[bool]) -> Result<f64> {
        validate_side(self.n, side)?;
        Ok(self.crossing_weight(side))
    }

    /// Crossing weight without the non-empty sides check.
    pub(crate) fn crossing_weight(&self, side: &[bool]) -> f64 {
        self.edges
            .iter()
            .filter(|e| side[e.u] != side[e.v])
            .map(|e| e.w)
            .sum()
    }

    /// Quotient graph under `map`. Self-loops vanish; parallel edges are
    /// summed when `merge_parallel` is set.
    pub fn contract(&self, map: &ContractionMap, merge_parallel: bool) -> Result<Self> {
        if map.source_len() != self.n {
            return Err(Error::InvalidContraction("map does not cover the graph"));
        }
        let edges = self.edges.iter().filter_map(|e| {
            let (a, b) = (map.image(e.u), map.image(e.v));
            (a != b).then(|| Edge::new(a, b, e.w))
        });
        let g = Self::from_clean(map.target_len(), edges.collect());
        Ok(if merge_parallel { g.merge_parallel() } else { g })
    }

    /// Folds parallel edges into one edge carrying the summed weight. Edges
    /// are ordered by their first occurrence.
    pub fn merge_parallel(&self) -> Self {
        let mut slot: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::with_capacity(self.edges.len());
        let mut merged: Vec<Edge> = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let key = (e.u.min(e.v), e.u.max(e.v));
            match slot.get(&key) {
                Some(&i) => merged[i].w += e.w,
                None => {
                    slot.insert(key, merged.len());
                    merged.push(Edge::new(key.0, key.1, e.w));
                }
            }
        }
        Self::from_clean(self.n, merged)
    }
}

fn validate_side(n: usize, side: &[bool]) -> Result<()> {
    if side.len() != n {
        return Err(Error::InvalidCut("membership vector has wrong length"));
    }
    let ones = side.iter().filter(|&&b| b).count();
    if ones == 0 || ones == n {
        return Err(Error::InvalidCut("one side is empty"));
    }
    Ok(())
}

/// A two-way vertex partition and its crossing weight.
///
/// Canonical form keeps vertex 0 on side `false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub side: Vec<bool>,
    pub value: f64,
}

impl Cut {
    /// Builds the canonical cut for `side`, computing its value in `g`.
    pub fn from_side(g: &WeightedGraph, side: Vec<bool>) -> Result<Self> {
        let value = g.cut_value(&side)?;
        Ok(Self {
            side: canonical_side(side),
            value,
        })
    }

    /// Packed canonical membership, one bit per vertex; equal partitions
    /// give equal keys.
    pub fn key(&self) -> Vec<u64> {
        side_key(&self.side)
    }

    pub fn bitstring(&self) -> String {
        self.side.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn side_size(&self) -> usize {
        self.side.iter().filter(|&&b| b).count()
    }
}

pub fn canonical_side(mut side: Vec<bool>) -> Vec<bool> {
    if side.first() == Some(&true) {
        side.iter_mut().for_each(|b| *b = !*b);
    }
    side
}

/// Bit-packed canonical key of a membership vector.
pub fn side_key(side: &[bool]) -> Vec<u64> {
    let flip = side.first() == Some(&true);
    let mut key = vec![0u64; side.len().div_ceil(64)];
    for (i, &b) in side.iter().enumerate() {
        if b != flip {
            key[i / 64] |= 1 << (i % 64);
        }
    }
    key
}

/// Surjective map from original vertices onto contracted vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionMap {
    map: Vec<usize>,
    groups: Vec<Vec<usize>>,
}

impl ContractionMap {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let k = map.iter().map(|&x| x + 1).max().unwrap_or(0);
        let mut groups = vec![Vec::new(); k];
        for (v, &t) in map.iter().enumerate() {
            groups[t].push(v);
        }
        if groups.iter().any(Vec::is_empty) {
            return Err(Error::InvalidContraction("map is not surjective"));
        }
        Ok(Self { map, groups })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
            groups: (0..n).map(|v| vec![v]).collect(),
        }
    }

    #[inline]
    pub fn image(&self, v: usize) -> usize {
        self.map[v]
    }

    pub fn group(&self, t: usize) -> &[usize] {
        &self.groups[t]
    }

    pub fn source_len(&self) -> usize {
        self.map.len()
    }

    pub fn target_len(&self) -> usize {
        self.groups.len()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ContractionMap) -> Result<Self> {
        if next.source_len() != self.target_len() {
            return Err(Error::InvalidContraction("maps do not compose"));
        }
        Self::new(self.map.iter().map(|&t| next.image(t)).collect())
    }

    /// Pulls a membership vector on the contracted vertices back to the
    /// original vertices.
    pub fn lift_side(&self, side: &[bool]) -> Vec<bool> {
        self.map.iter().map(|&t| side[t]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> WeightedGraph {
        WeightedGraph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap()
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> WeightedGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    edges.push(Edge::new(u, v, rng.random_range(1..6) as f64));
                }
            }
        }
        WeightedGraph::new(n, edges).unwrap()
    }

    #[test]
    fn singleton_cut_is_degree() {
        let g = triangle();
        assert_eq!(g.cut_value(&[true, false, false]).unwrap(), 2.0);
        let path = WeightedGraph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(path.cut_value(&[false, true, false]).unwrap(), 2.0);
    }

    #[test]
    fn empty_side_rejected() {
        let g = triangle();
        assert!(matches!(
            g.cut_value(&[false, false, false]),
            Err(Error::InvalidCut(_))
        ));
        assert!(g.cut_value(&[true, true, true]).is_err());
        assert!(g.cut_value(&[true, false]).is_err());
    }

    #[test]
    fn self_loops_dropped_and_bad_weights_rejected() {
        let g = WeightedGraph::from_triples(2, &[(0, 0, 3.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(g.m(), 1);
        assert!(WeightedGraph::from_triples(2, &[(0, 1, -1.0)]).is_err());
        assert!(WeightedGraph::from_triples(2, &[(0, 1, f64::NAN)]).is_err());
        assert!(WeightedGraph::from_triples(2, &[(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn degrees() {
        let star =
            WeightedGraph::from_triples(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        assert_eq!(star.weighted_degree(0), 3.0);
        let g = triangle();
        for v in 0..3 {
            assert_eq!(g.weighted_degree(v), 2.0);
        }
        let g = random_graph(12, 0.4, 5);
        for v in 0..g.n() {
            let scan: f64 = g
                .edges()
                .iter()
                .filter(|e| e.u == v || e.v == v)
                .map(|e| e.w)
                .sum();
            assert_eq!(g.weighted_degree(v), scan);
        }
    }

    #[test]
    fn contract_four_cycle() {
        let c4 = WeightedGraph::from_triples(
            4,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
        )
        .unwrap();
        let map = ContractionMap::new(vec![0, 1, 2, 2]).unwrap();
        let t = c4.contract(&map, true).unwrap();
        assert_eq!(t.n(), 3);
        let mut es: Vec<_> = t.edges().iter().map(|e| (e.u, e.v, e.w)).collect();
        es.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(es, vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]);

        let same = c4.contract(&ContractionMap::identity(4), false).unwrap();
        assert_eq!(same, c4);
    }

    #[test]
    fn contraction_map_rejects_gaps() {
        assert!(ContractionMap::new(vec![0, 2, 2]).is_err());
        let a = ContractionMap::new(vec![0, 0, 1, 2]).unwrap();
        let b = ContractionMap::new(vec![0, 1, 1]).unwrap();
        let ab = a.then(&b).unwrap();
        assert_eq!(ab.target_len(), 2);
        assert_eq!(ab.group(1), &[2, 3]);
        assert!(b.then(&a).is_err());
    }

    #[test]
    fn canonical_keys() {
        let a = Cut {
            side: canonical_side(vec![true, false, true]),
            value: 0.0,
        };
        assert_eq!(a.side, vec![false, true, false]);
        assert_eq!(side_key(&[true, false, true]), side_key(&[false, true, false]));
        assert_ne!(side_key(&[false, true, true]), side_key(&[false, true, false]));
    }

    proptest! {
        #[test]
        fn cut_matches_edge_scan_and_complement(seed in 0u64..500, mask in 1u32..255) {
            let g = random_graph(8, 0.5, seed);
            let side: Vec<bool> = (0..8).map(|i| mask >> i & 1 == 1).collect();
            let comp: Vec<bool> = side.iter().map(|b| !b).collect();
            let mut scan = 0.0;
            for e in g.edges() {
                if side[e.u] ^ side[e.v] {
                    scan += e.w;
                }
            }
            prop_assert_eq!(g.cut_value(&side).unwrap(), scan);
            prop_assert_eq!(g.cut_value(&comp).unwrap(), scan);
        }

        #[test]
        fn degree_sum_is_twice_total(seed in 0u64..500) {
            let g = random_graph(10, 0.3, seed);
            let deg: f64 = (0..g.n()).map(|v| g.weighted_degree(v)).sum();
            prop_assert_eq!(deg, 2.0 * g.total_weight());
        }

        #[test]
        fn contraction_preserves_respecting_cuts(seed in 0u64..300, split in 1usize..9) {
            let g = random_graph(10, 0.4, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            // two groups in contracted graph plus a random refinement
            let map: Vec<usize> = (0..10).map(|v| usize::from(v >= split)).collect();
            let cm = ContractionMap::new(map).unwrap();
            let q = g.contract(&cm, rng.random_bool(0.5)).unwrap();
            let side = cm.lift_side(&[false, true]);
            prop_assert_eq!(g.cut_value(&side).unwrap(), q.cut_value(&[false, true]).unwrap());
        }
    }
}
