//! End-to-end search: skeleton, packing, then per-tree analysis on the
//! original graph.

use std::str::FromStr;
#[cfg(not(target_arch = "wasm32"))]
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Cut, WeightedGraph};
use crate::oracle::mincut_deterministic;
use crate::packing::{
    minimum_spanning_tree, pack_trees, sample_tree, PackingConfig, SpanningTree, TreePacking,
};
use crate::respect1::one_respect_cuts;
use crate::respect2_dense::{
    enumerate_near_min, two_respect_dense, CutRepresentation, DEFAULT_DENSE_LIMIT,
};
use crate::respect2_sparse::two_respect_sparse;
use crate::rooted_tree::{RootedTree, TreeCut};
use crate::skeleton::{build_skeleton, Skeleton};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One sampled tree.
    ConstantProbability,
    /// `3⌈log₂ n⌉` sampled trees, or every packed tree if there are fewer.
    HighProbability,
    /// Many trees checked for 1-respecting cuts, a few for 2-respecting.
    Refined,
    /// Certify from the packing value when the graph is fat, else fall
    /// back to `HighProbability`.
    FatHeuristic,
    /// Stoer–Wagner.
    ExactOracle,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "constant-probability" | "constant" => Mode::ConstantProbability,
            "high-probability" | "high" => Mode::HighProbability,
            "refined" => Mode::Refined,
            "fat-heuristic" | "fat" => Mode::FatHeuristic,
            "exact-oracle" | "exact" => Mode::ExactOracle,
            _ => return Err(Error::InvalidParameter(format!("unknown mode {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    Auto,
    Dense,
    Sparse,
    /// Run both and fail on disagreement.
    Both,
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => SolverChoice::Auto,
            "dense" => SolverChoice::Dense,
            "sparse" => SolverChoice::Sparse,
            "both" => SolverChoice::Both,
            _ => return Err(Error::InvalidParameter(format!("unknown solver {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    OneRespect,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub epsilon: f64,
    /// Overrides the mode's tree count.
    pub trees: Option<usize>,
    pub seed: u64,
    pub solver: SolverChoice,
    pub dense_limit: usize,
    pub fat_delta: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::HighProbability,
            epsilon: 1.0 / 6.0,
            trees: None,
            seed: 0,
            solver: SolverChoice::Auto,
            dense_limit: DEFAULT_DENSE_LIMIT,
            fat_delta: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeResult {
    /// Index into the packing.
    pub tree_id: usize,
    pub weight: f64,
    pub solver: Solver,
    pub value: f64,
    pub tree_cut: TreeCut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonStats {
    pub epsilon: f64,
    pub p: f64,
    pub seed: u64,
    pub rho_star: f64,
    pub estimated_cprime: f64,
    pub attempts: usize,
    pub m: usize,
}

impl From<&Skeleton> for SkeletonStats {
    fn from(s: &Skeleton) -> Self {
        Self {
            epsilon: s.epsilon,
            p: s.p,
            seed: s.seed,
            rho_star: s.rho_star,
            estimated_cprime: s.estimated_cprime,
            attempts: s.attempts,
            m: s.m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub skeleton_ms: f64,
    pub packing_ms: f64,
    pub trees_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub phase: u8,
    pub trees: usize,
    pub best_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub value: f64,
    /// Canonical membership bitstring of the best cut.
    pub side: String,
    pub cut: Cut,
    pub tree_cut: Option<TreeCut>,
    pub per_tree: Vec<TreeResult>,
    pub trees_tried: usize,
    pub distinct_trees: usize,
    pub packing_value: f64,
    pub packing_upper_bound: f64,
    pub packing_converged: bool,
    pub skeleton: Option<SkeletonStats>,
    pub certified_fat: Option<bool>,
    pub phases: Vec<PhaseRecord>,
    /// Refined mode: the first phase that found the reported value.
    pub resolved_phase: Option<u8>,
    pub timings: Timings,
}

impl RunReport {
    fn bare(g: &WeightedGraph, cfg: &RunConfig, cut: Cut) -> Self {
        Self {
            mode: cfg.mode,
            seed: cfg.seed,
            n: g.n(),
            m: g.m(),
            value: cut.value,
            side: cut.bitstring(),
            cut,
            tree_cut: None,
            per_tree: Vec::new(),
            trees_tried: 0,
            distinct_trees: 0,
            packing_value: 0.0,
            packing_upper_bound: 0.0,
            packing_converged: true,
            skeleton: None,
            certified_fat: None,
            phases: Vec::new(),
            resolved_phase: None,
            timings: Timings::default(),
        }
    }

    /// The report with timings zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: Timings::default(),
            ..self.clone()
        }
    }
}

/// The browser build has no monotonic clock in std; timings read zero there.
#[cfg(target_arch = "wasm32")]
#[derive(Clone, Copy)]
struct Instant;

#[cfg(target_arch = "wasm32")]
impl Instant {
    fn now() -> Self {
        Instant
    }

    fn elapsed(&self) -> std::time::Duration {
        std::time::Duration::ZERO
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn ceil_log2(n: usize) -> usize {
    (n.max(2) as f64).log2().ceil() as usize
}

/// Dense when `n ≤ 512` or `n² ≤ 8m·log²n`, within the dense limit.
pub fn choose_solver(n: usize, m: usize, dense_limit: usize) -> Solver {
    let lg = (n.max(2) as f64).log2();
    let dense = n <= 512 || (n * n) as f64 <= 8.0 * m as f64 * lg * lg;
    if dense && n <= dense_limit {
        Solver::Dense
    } else {
        Solver::Sparse
    }
}

#[cfg(feature = "parallel")]
fn pool() -> Option<&'static rayon::ThreadPool> {
    use std::sync::OnceLock;
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let k: usize = std::env::var("MINCUT_THREADS").ok()?.trim().parse().ok()?;
        rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build().ok()
    })
    .as_ref()
}

/// Maps `f` over `items` on the worker pool, keeping order.
#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    let run = || items.par_iter().map(&f).collect();
    match pool() {
        Some(p) => p.install(run),
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Smallest cut 1- or 2-respecting `rt`, evaluated in `g`.
fn analyze_tree(
    g: &WeightedGraph,
    rt: &RootedTree,
    choice: SolverChoice,
    dense_limit: usize,
    two: bool,
) -> Result<(Solver, TreeCut)> {
    if !two {
        let t = one_respect_cuts(rt, g);
        let v = t.argmin.ok_or(Error::TooSmall)?;
        return Ok((Solver::OneRespect, TreeCut::One { v }));
    }
    let dense = |rt: &RootedTree| -> Result<(f64, TreeCut)> {
        let t = two_respect_dense(rt, g, dense_limit)?;
        Ok((t.min_value, t.argmin.ok_or(Error::TooSmall)?))
    };
    let sparse = |rt: &RootedTree| -> Result<(f64, TreeCut)> {
        let out = two_respect_sparse(rt, g)?;
        Ok((out.cut.value, out.tree_cut))
    };
    let solver = match choice {
        SolverChoice::Auto => choose_solver(g.n(), g.m(), dense_limit),
        SolverChoice::Dense => Solver::Dense,
        SolverChoice::Sparse | SolverChoice::Both => Solver::Sparse,
    };
    let (value, cut) = match solver {
        Solver::Dense => dense(rt)?,
        _ => sparse(rt)?,
    };
    if choice == SolverChoice::Both {
        let (dv, _) = dense(rt)?;
        let tol = 1e-9 * (1.0 + dv.abs());
        if (dv - value).abs() > tol {
            return Err(Error::Internal(format!(
                "dense and sparse solvers disagree: {dv} vs {value}"
            )));
        }
    }
    Ok((solver, cut))
}

/// Validation shared by every mode. `Ok(Some(_))` short-circuits with a
/// zero-weight cut.
fn precheck(g: &WeightedGraph, cfg: &RunConfig) -> Result<Option<RunReport>> {
    if g.n() < 2 {
        return Err(Error::TooSmall);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be in (0, 1/2), got {}",
            cfg.epsilon
        )));
    }
    let (k, comp) = g.components_by(|e| e.w > 0.0);
    if k > 1 {
        let side = comp.iter().map(|&c| c != comp[0]).collect();
        return Ok(Some(RunReport::bare(g, cfg, Cut::from_side(g, side)?)));
    }
    Ok(None)
}

struct Prepared {
    skeleton: Skeleton,
    packing: TreePacking,
    skeleton_ms: f64,
    packing_ms: f64,
}

fn prepare(g: &WeightedGraph, skel_eps: f64, pack_eps: f64, seed: u64) -> Result<Prepared> {
    let t = Instant::now();
    let skeleton = build_skeleton(g, skel_eps.min(0.25), seed)?;
    let skeleton_ms = ms(t);
    let t = Instant::now();
    let packing = pack_trees(skeleton.graph(), &PackingConfig::new(pack_eps))?;
    let packing_ms = ms(t);
    if packing.trees.is_empty() {
        return Err(Error::Internal("packing produced no trees".into()));
    }
    Ok(Prepared {
        skeleton,
        packing,
        skeleton_ms,
        packing_ms,
    })
}

/// `count` tree ids drawn by packing weight; every tree, in order, when the
/// packing has no more than `count` of them. Duplicates are dropped.
fn pick_trees(p: &TreePacking, count: usize, rng: &mut ChaCha8Rng, all_if_few: bool) -> Vec<usize> {
    if all_if_few && p.trees.len() <= count {
        return (0..p.trees.len()).collect();
    }
    let mut ids: Vec<usize> = Vec::with_capacity(count);
    for _ in 0..count {
        let t = sample_tree(p, rng).expect("non-empty packing");
        let id = p
            .trees
            .iter()
            .position(|x| std::ptr::eq(&x.tree, t))
            .expect("sampled tree is in the packing");
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    ids
}

fn tree_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}

/// Analyses the chosen trees on `g`; results come back in `ids` order.
fn run_trees(
    g: &WeightedGraph,
    h: &WeightedGraph,
    p: &TreePacking,
    ids: &[usize],
    cfg: &RunConfig,
    two: bool,
) -> Result<Vec<TreeResult>> {
    let results = par_map(ids, |&id| -> Result<TreeResult> {
        let tree: &SpanningTree = &p.trees[id].tree;
        let rt = RootedTree::from_spanning_tree(h, tree, 0)?;
        let (solver, tree_cut) = analyze_tree(g, &rt, cfg.solver, cfg.dense_limit, two)?;
        let value = g.cut_value(&tree_cut.side(&rt))?;
        Ok(TreeResult {
            tree_id: id,
            weight: p.trees[id].weight,
            solver,
            value,
            tree_cut,
        })
    });
    results.into_iter().collect()
}

/// First minimum by value; ties keep the earlier tree.
fn best_of(results: &[TreeResult]) -> Option<&TreeResult> {
    results
        .iter()
        .fold(None, |b: Option<&TreeResult>, r| match b {
            Some(b) if b.value <= r.value => Some(b),
            _ => Some(r),
        })
}

fn finish(
    g: &WeightedGraph,
    h: &WeightedGraph,
    p: &TreePacking,
    best: &TreeResult,
    mut report: RunReport,
) -> Result<RunReport> {
    let rt = RootedTree::from_spanning_tree(h, &p.trees[best.tree_id].tree, 0)?;
    let cut = Cut::from_side(g, best.tree_cut.side(&rt))?;
    report.value = cut.value;
    report.side = cut.bitstring();
    report.cut = cut;
    report.tree_cut = Some(best.tree_cut);
    Ok(report)
}

fn packed_report(g: &WeightedGraph, cfg: &RunConfig, prep: &Prepared) -> RunReport {
    // placeholder cut, replaced by `finish`
    let mut side = vec![false; g.n()];
    side[g.n() - 1] = true;
    let cut = Cut {
        side,
        value: f64::INFINITY,
    };
    let mut r = RunReport::bare(g, cfg, cut);
    r.distinct_trees = prep.packing.distinct_trees();
    r.packing_value = prep.packing.value;
    r.packing_upper_bound = prep.packing.upper_bound;
    r.packing_converged = prep.packing.converged;
    r.skeleton = Some(SkeletonStats::from(&prep.skeleton));
    r.timings.skeleton_ms = prep.skeleton_ms;
    r.timings.packing_ms = prep.packing_ms;
    r
}

pub fn find_mincut(g: &WeightedGraph, cfg: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    if let Some(r) = precheck(g, cfg)? {
        return Ok(r);
    }
    let mut report = match cfg.mode {
        Mode::ExactOracle => {
            let t = Instant::now();
            let cut = mincut_deterministic(g)?;
            let mut r = RunReport::bare(g, cfg, cut);
            r.timings.trees_ms = ms(t);
            r
        }
        Mode::Refined => find_mincut_refined(g, cfg)?,
        Mode::FatHeuristic => fat_heuristic(g, cfg)?,
        Mode::ConstantProbability | Mode::HighProbability => sampled_trees(g, cfg)?,
    };
    report.timings.total_ms = ms(start);
    Ok(report)
}

fn sampled_trees(g: &WeightedGraph, cfg: &RunConfig) -> Result<RunReport> {
    let prep = prepare(g, cfg.epsilon, cfg.epsilon, cfg.seed)?;
    let h = prep.skeleton.graph();
    let mut rng = tree_rng(cfg.seed);
    let ids = match cfg.mode {
        Mode::ConstantProbability => pick_trees(&prep.packing, cfg.trees.unwrap_or(1), &mut rng, false),
        _ => {
            let k = cfg.trees.unwrap_or(3 * ceil_log2(g.n()));
            pick_trees(&prep.packing, k, &mut rng, true)
        }
    };
    let t = Instant::now();
    let results = run_trees(g, h, &prep.packing, &ids, cfg, true)?;
    let mut report = packed_report(g, cfg, &prep);
    report.timings.trees_ms = ms(t);
    report.trees_tried = results.len();
    let best = best_of(&results).cloned().expect("at least one tree");
    report.per_tree = results;
    finish(g, h, &prep.packing, &best, report)
}

/// Cuts within `alpha` of the minimum that 2-respect (3-respect for
/// `⌊2α⌋ = 3`) one of the trees a high-probability run would check.
pub fn near_min_cuts(g: &WeightedGraph, alpha: f64, cfg: &RunConfig) -> Result<CutRepresentation> {
    if g.n() < 2 {
        return Err(Error::TooSmall);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let trees = if g.components_by(|e| e.w > 0.0).0 > 1 {
        // nothing to pack; zero-weight cuts 1-respect any spanning tree
        let t = minimum_spanning_tree(g, &vec![0.0; g.m()]).ok_or(Error::Disconnected)?;
        vec![RootedTree::from_spanning_tree(g, &t, 0)?]
    } else {
        let prep = prepare(g, cfg.epsilon, cfg.epsilon, cfg.seed)?;
        let k = cfg.trees.unwrap_or(3 * ceil_log2(g.n()));
        let ids = pick_trees(&prep.packing, k, &mut tree_rng(cfg.seed), true);
        ids.iter()
            .map(|&id| RootedTree::from_spanning_tree(prep.skeleton.graph(), &prep.packing.trees[id].tree, 0))
            .collect::<Result<Vec<_>>>()?
    };
    enumerate_near_min(g, &trees, alpha)
}

/// Phase 2 checks `4 log² n` trees for 1-respecting cuts, phase 3 checks
/// `⌈log n / log log n⌉` trees for 2-respecting cuts (logs base 2). The
/// skeleton precision `1/(4 log n)` is only used for `n ≥ 256`; below
/// that the graph itself is packed.
pub fn find_mincut_refined(g: &WeightedGraph, cfg: &RunConfig) -> Result<RunReport> {
    if let Some(r) = precheck(g, cfg)? {
        return Ok(r);
    }
    let n = g.n();
    let lg = (n.max(2) as f64).log2();
    let prep = if n >= 256 {
        prepare(g, 1.0 / (4.0 * lg), cfg.epsilon, cfg.seed)?
    } else {
        let t = Instant::now();
        let packing = pack_trees(g, &PackingConfig::new(cfg.epsilon))?;
        Prepared {
            skeleton: Skeleton {
                graph: Some(g.clone()),
                epsilon: cfg.epsilon,
                p: 1.0,
                seed: cfg.seed,
                rho_star: 0.0,
                estimated_cprime: 2.0 * packing.value,
                attempts: 0,
                n,
                m: g.m(),
            },
            packing_ms: ms(t),
            packing,
            skeleton_ms: 0.0,
        }
    };
    let h = prep.skeleton.graph();
    let mut rng = tree_rng(cfg.seed);
    let t = Instant::now();

    let k2 = (4.0 * lg * lg).ceil() as usize;
    let ids2 = pick_trees(&prep.packing, k2, &mut rng, true);
    let phase2 = run_trees(g, h, &prep.packing, &ids2, cfg, false)?;
    let k3 = cfg
        .trees
        .unwrap_or_else(|| (lg / lg.log2().max(1.0)).ceil().max(1.0) as usize);
    let ids3 = pick_trees(&prep.packing, k3, &mut rng, true);
    let phase3 = run_trees(g, h, &prep.packing, &ids3, cfg, true)?;

    let b2 = best_of(&phase2).cloned().expect("phase 2 has trees");
    let b3 = best_of(&phase3).cloned().expect("phase 3 has trees");
    let mut report = packed_report(g, cfg, &prep);
    report.timings.trees_ms = ms(t);
    report.trees_tried = phase2.len() + phase3.len();
    report.phases = vec![
        PhaseRecord {
            phase: 2,
            trees: phase2.len(),
            best_value: b2.value,
        },
        PhaseRecord {
            phase: 3,
            trees: phase3.len(),
            best_value: b3.value,
        },
    ];
    let (best, phase) = if b2.value <= b3.value { (b2, 2) } else { (b3, 3) };
    report.resolved_phase = Some(phase);
    report.per_tree = phase2.into_iter().chain(phase3).collect();
    finish(g, h, &prep.packing, &best, report)
}

/// Packs with `ε = δ/5` and compares the packing value against the best
/// 1-respecting cut `c″` of the sampled trees, both measured in the
/// skeleton. A packing above `(1 + δ/2 − ε)·c″/2` certifies `c″`; otherwise
/// the high-probability search runs.
pub fn fat_heuristic(g: &WeightedGraph, cfg: &RunConfig) -> Result<RunReport> {
    if let Some(r) = precheck(g, cfg)? {
        return Ok(r);
    }
    let delta = cfg.fat_delta;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must be in (0, 1), got {delta}")));
    }
    let eps = delta / 5.0;
    let prep = prepare(g, eps, eps, cfg.seed)?;
    let h = prep.skeleton.graph();
    let mut rng = tree_rng(cfg.seed);
    let k = cfg.trees.unwrap_or(3 * ceil_log2(g.n()));
    let ids = pick_trees(&prep.packing, k, &mut rng, true);
    let t = Instant::now();
    let in_h = run_trees(h, h, &prep.packing, &ids, cfg, false)?;
    let c2 = best_of(&in_h).map_or(f64::INFINITY, |b| b.value);
    let certified = prep.packing.value > (1.0 + delta / 2.0 - eps) * c2 / 2.0;
    if certified {
        let results = run_trees(g, h, &prep.packing, &ids, cfg, false)?;
        let best = best_of(&in_h).cloned().expect("trees were analysed");
        let mut report = packed_report(g, cfg, &prep);
        report.timings.trees_ms = ms(t);
        report.trees_tried = results.len();
        report.per_tree = results;
        report.certified_fat = Some(true);
        return finish(g, h, &prep.packing, &best, report);
    }
    let fallback = RunConfig {
        mode: Mode::HighProbability,
        ..*cfg
    };
    let mut report = sampled_trees(g, &fallback)?;
    report.mode = Mode::FatHeuristic;
    report.certified_fat = Some(false);
    Ok(report)
}
