//! Semi-supervised labeling on a two-cluster graph:
//! `min ||A x - y||^2 + lambda ||B x||_1`, `A` selecting labeled vertices and
//! `B` the signed edge incidence.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Benchmark;
use crate::error::{invalid, Result};
use crate::oracles::{GraphDualProx, Incidence, ProxOracle as _};
use crate::problem::CompositeProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphInstance {
    pub d: usize,
    pub within_prob: f64,
    pub cross_pairs: usize,
    pub s: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl GraphInstance {
    /// 100 vertices, `d / 25` bridges, 10 labels.
    pub fn reference(seed: u64) -> Self {
        Self {
            d: 100,
            within_prob: 0.5,
            cross_pairs: 4,
            s: 10,
            lambda: 1e-4,
            seed,
        }
    }
}

pub struct GraphProblem {
    pub problem: CompositeProblem,
    pub oracle: GraphDualProx,
    /// `+1` for the first cluster, `-1` for the second.
    pub labels: Vec<f64>,
    pub labeled: Vec<usize>,
    pub observed: Vec<f64>,
}

impl GraphProblem {
    pub fn into_benchmark(self, name: &str, seed: u64) -> Benchmark {
        let n = self.problem.dim();
        Benchmark {
            name: name.to_string(),
            problem: self.problem,
            oracle: Arc::new(self.oracle),
            x0: vec![0.0; n],
            seed,
        }
    }
}

/// Vertices `0..d/2` form the first cluster and the rest the second. Each
/// within-cluster pair is an edge independently with `within_prob`; exactly
/// `cross_pairs` distinct bridges are drawn uniformly.
pub fn generate_edges(inst: &GraphInstance) -> Result<Vec<(usize, usize)>> {
    let d = inst.d;
    let half = d / 2;
    let available = half * (d - half);
    if inst.cross_pairs > available {
        return Err(invalid(format!(
            "{} cross pairs requested but only {available} exist",
            inst.cross_pairs
        )));
    }
    if !(0.0..=1.0).contains(&inst.within_prob) {
        return Err(invalid("within-cluster probability must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed);
    let mut edges = Vec::new();
    for (lo, hi) in [(0, half), (half, d)] {
        for u in lo..hi {
            for v in u + 1..hi {
                if rng.random_bool(inst.within_prob) {
                    edges.push((u, v));
                }
            }
        }
    }
    for idx in sample(&mut rng, available, inst.cross_pairs) {
        edges.push((idx / (d - half), half + idx % (d - half)));
    }
    Ok(edges)
}

pub fn build_graph_problem(inst: &GraphInstance) -> Result<GraphProblem> {
    let d = inst.d;
    if d < 2 {
        return Err(invalid("graph needs at least two vertices"));
    }
    if inst.s == 0 || inst.s > d {
        return Err(invalid(format!("need 0 < s <= d, got s = {}", inst.s)));
    }
    if !(inst.lambda >= 0.0) {
        return Err(invalid("lambda must be nonnegative"));
    }
    let edges = generate_edges(inst)?;
    let incidence = Incidence::new(d, &edges)?;
    let labels: Vec<f64> = (0..d).map(|v| if v < d / 2 { 1.0 } else { -1.0 }).collect();

    // Labels use a stream separate from the edge draw.
    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut labeled = sample(&mut rng, d, inst.s).into_vec();
    labeled.sort_unstable();
    let observed: Vec<f64> = labeled.iter().map(|&v| labels[v]).collect();

    let (sel1, y1) = (labeled.clone(), observed.clone());
    let eval_g = Arc::new(move |x: &[f64]| {
        sel1.iter()
            .zip(&y1)
            .map(|(&v, y)| (x[v] - y) * (x[v] - y))
            .sum::<f64>()
    });
    let (sel2, y2) = (labeled.clone(), observed.clone());
    let grad_g = Arc::new(move |x: &[f64]| {
        let mut g = vec![0.0; x.len()];
        for (&v, y) in sel2.iter().zip(&y2) {
            g[v] = 2.0 * (x[v] - y);
        }
        g
    });
    let oracle = GraphDualProx::new(inst.lambda, incidence);
    let h_oracle = oracle.clone();
    let eval_h = Arc::new(move |x: &[f64]| h_oracle.nonsmooth(x));
    // A selects rows of the identity, so ||A||^2 = 1.
    let problem = CompositeProblem::new(d, 2.0, eval_g, grad_g, eval_h)?;
    Ok(GraphProblem {
        problem,
        oracle,
        labels,
        labeled,
        observed,
    })
}
