//! Browser bindings. Every export returns a JSON string; the plain
//! functions underneath are what the native tests call.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use treepack::driver::{find_mincut, Mode, RunConfig};
use treepack::io::parse_graph;
use treepack::oracle::{cycle_alpha_cut_count, mincut_deterministic, qk_bound};
use treepack::packing::{pack_trees, PackingConfig};
use treepack::{Edge, WeightedGraph};
use wasm_bindgen::prelude::*;

const MAX_DEMO_N: usize = 400;

#[derive(Serialize)]
pub struct MincutView {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub value: f64,
    pub oracle_value: f64,
    pub side: String,
    pub cut_edges: Vec<(usize, usize)>,
    pub trees_tried: usize,
    pub packing_value: f64,
}

#[derive(Serialize)]
pub struct CountRow {
    pub n: u64,
    pub q_k: f64,
    pub best_q: f64,
    pub cycle: f64,
}

#[derive(Serialize)]
pub struct PackedView {
    pub value: f64,
    pub upper_bound: f64,
    pub min_cut: f64,
    pub trees: Vec<PackedTreeView>,
}

#[derive(Serialize)]
pub struct PackedTreeView {
    pub weight: f64,
    pub edges: Vec<(usize, usize)>,
}

fn to_json<T: Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("view serializes")
}

/// Connected graph: a random tree plus `extra` random edges, weights 1 to 4.
pub fn random_graph(n: usize, extra: usize, seed: u32) -> Result<WeightedGraph, String> {
    if !(2..=MAX_DEMO_N).contains(&n) {
        return Err(format!("n must be between 2 and {MAX_DEMO_N}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let mut edges: Vec<Edge> = (1..n)
        .map(|v| Edge::new(v, rng.random_range(0..v), rng.random_range(1..=4) as f64))
        .collect();
    for _ in 0..extra.min(20 * n) {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            edges.push(Edge::new(u, v, rng.random_range(1..=4) as f64));
        }
    }
    WeightedGraph::new(n, edges).map_err(|e| e.to_string())
}

pub fn mincut_view(n: usize, extra: usize, seed: u32) -> Result<MincutView, String> {
    let g = random_graph(n, extra, seed)?;
    let cfg = RunConfig {
        mode: Mode::HighProbability,
        seed: seed as u64,
        ..Default::default()
    };
    let r = find_mincut(&g, &cfg).map_err(|e| e.to_string())?;
    let oracle = mincut_deterministic(&g).map_err(|e| e.to_string())?;
    let cut_edges = g
        .edges()
        .iter()
        .filter(|e| r.cut.side[e.u] != r.cut.side[e.v])
        .map(|e| (e.u, e.v))
        .collect();
    Ok(MincutView {
        n,
        edges: g.edges().iter().map(|e| (e.u, e.v, e.w)).collect(),
        value: r.value,
        oracle_value: oracle.value,
        side: r.side,
        cut_edges,
        trees_tried: r.trees_tried,
        packing_value: r.packing_value,
    })
}

pub fn count_rows(max_n: u64, alpha: f64) -> Result<Vec<CountRow>, String> {
    if !(3..=200).contains(&max_n) {
        return Err("n must be between 3 and 200".into());
    }
    (3..=max_n)
        .map(|n| {
            let b = qk_bound(n, alpha).map_err(|e| e.to_string())?;
            Ok(CountRow {
                n,
                q_k: b.q_k,
                best_q: b.best_q,
                cycle: cycle_alpha_cut_count(n, alpha),
            })
        })
        .collect()
}

pub fn packing_view(text: &str, epsilon: f64) -> Result<PackedView, String> {
    let g = parse_graph(text).map_err(|e| e.to_string())?;
    if g.n() > MAX_DEMO_N {
        return Err(format!("at most {MAX_DEMO_N} vertices in the demo"));
    }
    let p = pack_trees(&g, &PackingConfig::new(epsilon)).map_err(|e| e.to_string())?;
    let c = mincut_deterministic(&g).map_err(|e| e.to_string())?;
    Ok(PackedView {
        value: p.value,
        upper_bound: p.upper_bound,
        min_cut: c.value,
        trees: p
            .trees
            .iter()
            .map(|t| PackedTreeView {
                weight: t.weight,
                edges: t.tree.edges.iter().map(|&id| (g.edge(id).u, g.edge(id).v)).collect(),
            })
            .collect(),
    })
}

#[wasm_bindgen(js_name = randomMincut)]
pub fn random_mincut(n: usize, extra: usize, seed: u32) -> Result<String, JsError> {
    mincut_view(n, extra, seed).map(|v| to_json(&v)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = cutCounts)]
pub fn cut_counts(max_n: u32, alpha: f64) -> Result<String, JsError> {
    count_rows(max_n as u64, alpha).map(|v| to_json(&v)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = packGraph)]
pub fn pack_graph(text: &str, epsilon: f64) -> Result<String, JsError> {
    packing_view(text, epsilon).map(|v| to_json(&v)).map_err(|e| JsError::new(&e))
}
