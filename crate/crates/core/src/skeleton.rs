//! Random skeletons: keep each unit of edge weight independently with
//! probability `p`, so that the skeleton's minimum cut lands near
//! `ρ* = ⌈C·ε⁻²·ln n⌉` and cuts of `G` are preserved up to `1 ± ε` after
//! scaling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::packing::{pack_trees, PackingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonConfig {
    /// `C` in `ρ* = ⌈C·ε⁻²·ln n⌉`.
    pub rho_constant: f64,
    /// Accept `p` once the estimated skeleton cut `2β̂` lies in
    /// `[lo·ρ*, hi·ρ*]`.
    pub window: (f64, f64),
    /// Reseeds tolerated when a sample comes out disconnected.
    pub max_attempts: usize,
    /// Precision of the packing used as a cut estimator.
    pub estimate_epsilon: f64,
    pub estimate_iters: usize,
}

impl Default for SkeletonConfig {
    fn default() -> Self {
        Self {
            rho_constant: 4.0,
            window: (1.0, 6.0),
            max_attempts: 16,
            estimate_epsilon: 0.25,
            estimate_iters: 20_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Skeleton {
    /// Integer multiplicities as weights; same vertex set as the source.
    #[serde(skip)]
    pub graph: Option<WeightedGraph>,
    pub epsilon: f64,
    pub p: f64,
    /// Seed the accepted sample was drawn from.
    pub seed: u64,
    pub rho_star: f64,
    /// `2β̂` measured on the skeleton (or on `G` when `p = 1`).
    pub estimated_cprime: f64,
    pub attempts: usize,
    pub n: usize,
    pub m: usize,
}

impl Skeleton {
    pub fn graph(&self) -> &WeightedGraph {
        self.graph.as_ref().expect("skeleton graph is present until serialized")
    }

    pub fn is_identity(&self) -> bool {
        self.p >= 1.0
    }
}

pub fn rho_star(n: usize, epsilon: f64, constant: f64) -> f64 {
    (constant * (n.max(2) as f64).ln() / (epsilon * epsilon)).ceil()
}

/// Units of weight `w` kept at rate `p`: Binomial for integral `w`,
/// Poisson with mean `w·p` otherwise.
pub fn sample_multiplicity(w: f64, p: f64, rng: &mut ChaCha8Rng) -> u64 {
    if w <= 0.0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 && w.fract() == 0.0 {
        return w as u64;
    }
    if w.fract() == 0.0 && w <= (1u64 << 53) as f64 {
        Binomial::new(w as u64, p.min(1.0)).expect("valid binomial").sample(rng)
    } else {
        Poisson::new(w * p).expect("positive mean").sample(rng) as u64
    }
}

fn derived_seed(seed: u64, attempt: usize) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// One sample at rate `p`; edge `i` draws from stream `i` of `seed`, so the
/// result does not depend on iteration order.
pub fn sample_skeleton(g: &WeightedGraph, p: f64, seed: u64) -> WeightedGraph {
    let edges: Vec<Edge> = g
        .edges()
        .iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let k = sample_multiplicity(e.w, p, &mut rng);
            (k > 0).then(|| Edge::new(e.u, e.v, k as f64))
        })
        .collect();
    WeightedGraph::new(g.n(), edges).expect("sample of a valid graph is valid")
}

/// Feasible packing value: a lower bound on the minimum cut, at least
/// about half of it.
fn packing_estimate(g: &WeightedGraph, cfg: &SkeletonConfig) -> Result<f64> {
    let pc = PackingConfig {
        epsilon: cfg.estimate_epsilon,
        max_iters: Some(cfg.estimate_iters),
        step_scale: 1.0,
    };
    Ok(pack_trees(g, &pc)?.value)
}

pub fn build_skeleton(g: &WeightedGraph, epsilon: f64, seed: u64) -> Result<Skeleton> {
    build_skeleton_with(g, epsilon, seed, &SkeletonConfig::default())
}

pub fn build_skeleton_with(
    g: &WeightedGraph,
    epsilon: f64,
    seed: u64,
    cfg: &SkeletonConfig,
) -> Result<Skeleton> {
    if !(epsilon > 0.0 && epsilon <= 0.25) {
        return Err(Error::InvalidParameter(format!(
            "skeleton epsilon must be in (0, 1/4], got {epsilon}"
        )));
    }
    if g.n() < 2 {
        return Err(Error::TooSmall);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let rho = rho_star(g.n(), epsilon, cfg.rho_constant);
    let lower = packing_estimate(g, cfg)?;
    let identity = |attempts| Skeleton {
        graph: Some(g.clone()),
        epsilon,
        p: 1.0,
        seed,
        rho_star: rho,
        estimated_cprime: 2.0 * lower,
        attempts,
        n: g.n(),
        m: g.m(),
    };
    if lower <= rho {
        return Ok(identity(0));
    }

    let (lo, hi) = (cfg.window.0 * rho, cfg.window.1 * rho);
    let mut attempts = 0;
    for attempt in 0..cfg.max_attempts {
        let s = derived_seed(seed, attempt);
        let mut p = (rho / lower).min(1.0);
        // doubling and halving; remember both directions to stop oscillation
        let (mut p_lo, mut p_hi) = (0.0f64, f64::INFINITY);
        let mut accepted = None;
        let mut disconnected = false;
        for _ in 0..40 {
            attempts += 1;
            let h = sample_skeleton(g, p, s);
            if !h.is_connected() {
                disconnected = true;
                break;
            }
            let est = 2.0 * packing_estimate(&h, cfg)?;
            if est < lo && p < 1.0 {
                p_lo = p;
                p = if p_hi.is_finite() { (p + p_hi) / 2.0 } else { (2.0 * p).min(1.0) };
            } else if est > hi {
                p_hi = p;
                p = if p_lo > 0.0 { (p + p_lo) / 2.0 } else { p / 2.0 };
            } else {
                accepted = Some((h, p, est));
                break;
            }
        }
        if disconnected {
            continue;
        }
        let Some((h, p, est)) = accepted else {
            return Err(Error::Internal("skeleton rate search did not settle".into()));
        };
        if p >= 1.0 && g.edges().iter().all(|e| e.w.fract() == 0.0) {
            return Ok(identity(attempts));
        }
        return Ok(Skeleton {
            n: h.n(),
            m: h.m(),
            graph: Some(h),
            epsilon,
            p,
            seed: s,
            rho_star: rho,
            estimated_cprime: est,
            attempts,
        });
    }
    Err(Error::SkeletonDisconnected(cfg.max_attempts))
}
