//! Small lasso instance with a closed-form prox, used where exact reference
//! values are needed.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::Benchmark;
use crate::error::Result;
use crate::linalg::{dot, power_iteration};
use crate::oracles::L1Prox;
use crate::problem::CompositeProblem;

pub const LASSO_ROWS: usize = 40;
pub const LASSO_COLS: usize = 20;
pub const LASSO_LAMBDA: f64 = 0.1;

/// `0.5 ||M x - b||^2 + 0.1 ||x||_1` with Gaussian `M` (40 x 20, entries of
/// variance 1/40), a 5-sparse ground truth and small noise.
pub fn desk_lasso(seed: u64) -> Result<Benchmark> {
    let (m, n) = (LASSO_ROWS, LASSO_COLS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entry = Normal::new(0.0, 1.0 / (m as f64).sqrt()).expect("valid normal");
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| entry.sample(&mut rng)).collect())
        .collect();
    let mut truth = vec![0.0; n];
    for (i, v) in [(1, 1.5), (4, -2.0), (9, 1.0), (13, -0.7), (17, 2.5)] {
        truth[i] = v;
    }
    let noise = Normal::new(0.0, 0.01).expect("valid normal");
    let b: Vec<f64> = rows
        .iter()
        .map(|r| dot(r, &truth) + noise.sample(&mut rng))
        .collect();

    let rows = Arc::new(rows);
    let b = Arc::new(b);
    let mt_m = {
        let rows = Arc::clone(&rows);
        move |x: &[f64]| {
            let mut out = vec![0.0; x.len()];
            for r in rows.iter() {
                let v = dot(r, x);
                for (o, a) in out.iter_mut().zip(r) {
                    *o += v * a;
                }
            }
            out
        }
    };
    let lipschitz = power_iteration(n, 500, mt_m) * 1.01;

    let (r1, b1) = (Arc::clone(&rows), Arc::clone(&b));
    let eval_g = Arc::new(move |x: &[f64]| {
        0.5 * r1
            .iter()
            .zip(b1.iter())
            .map(|(r, bi)| (dot(r, x) - bi).powi(2))
            .sum::<f64>()
    });
    let (r2, b2) = (Arc::clone(&rows), Arc::clone(&b));
    let grad_g = Arc::new(move |x: &[f64]| {
        let mut g = vec![0.0; x.len()];
        for (r, bi) in r2.iter().zip(b2.iter()) {
            let res = dot(r, x) - bi;
            for (gi, a) in g.iter_mut().zip(r) {
                *gi += res * a;
            }
        }
        g
    });
    let eval_h = Arc::new(|x: &[f64]| LASSO_LAMBDA * x.iter().map(|v| v.abs()).sum::<f64>());
    let problem = CompositeProblem::new(n, lipschitz, eval_g, grad_g, eval_h)?;
    Ok(Benchmark {
        name: "lasso".into(),
        problem,
        oracle: Arc::new(L1Prox {
            lambda: LASSO_LAMBDA,
        }),
        x0: vec![0.0; n],
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::ProxOracle;

    #[test]
    fn oracle_matches_problem_term() {
        let bench = desk_lasso(1).unwrap();
        let x: Vec<f64> = (0..LASSO_COLS).map(|i| i as f64 * 0.1 - 1.0).collect();
        let a = bench.problem.nonsmooth_value(&x).unwrap();
        assert!((a - bench.oracle.nonsmooth(&x)).abs() < 1e-15);
    }

    #[test]
    fn gradient_is_consistent() {
        let bench = desk_lasso(2).unwrap();
        let p = &bench.problem;
        let x: Vec<f64> = (0..LASSO_COLS).map(|i| (i as f64).sin()).collect();
        let g = p.smooth_gradient(&x).unwrap();
        for i in [0, 7, 19] {
            let h = 1e-6;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (p.smooth_value(&xp).unwrap() - p.smooth_value(&xm).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6 * g[i].abs().max(1.0));
        }
    }
}
