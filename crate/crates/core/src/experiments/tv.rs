//! Deblurring with total-variation regularization:
//! `min ||A x - y||^2 + lambda TV(x)` where `A` is a Gaussian blur.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Benchmark;
use crate::error::{invalid, Result};
use crate::linalg::power_iteration;
use crate::oracles::{ProxOracle as _, TvDualProx};
use crate::problem::CompositeProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvInstance {
    pub image_side: usize,
    /// Blur kernel width in pixels (odd). Width 1 is the identity.
    pub kernel_size: usize,
    pub kernel_std: f64,
    pub noise_std: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl TvInstance {
    /// 64 x 64 synthetic image with the reference blur, noise and weight.
    pub fn desk(seed: u64) -> Self {
        Self {
            image_side: 64,
            kernel_size: 9,
            kernel_std: 4.0,
            noise_std: 1e-3,
            lambda: 1e-4,
            seed,
        }
    }

    /// Same settings at 256 x 256.
    pub fn full(seed: u64) -> Self {
        Self {
            image_side: 256,
            ..Self::desk(seed)
        }
    }
}

/// Normalized 1-D Gaussian taps; the 2-D kernel is their outer product.
pub fn gaussian_taps(size: usize, std: f64) -> Result<Vec<f64>> {
    if size.is_multiple_of(2) {
        return Err(invalid(format!("kernel size must be odd, got {size}")));
    }
    if size > 1 && !(std > 0.0) {
        return Err(invalid(format!("kernel std must be positive, got {std}")));
    }
    let r = (size / 2) as f64;
    let w: Vec<f64> = (0..size)
        .map(|i| {
            let t = i as f64 - r;
            if size == 1 {
                1.0
            } else {
                (-t * t / (2.0 * std * std)).exp()
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / total).collect())
}

/// Separable blur with half-sample symmetric boundaries (`x[-1] = x[0]`).
/// With a symmetric kernel the resulting matrix is symmetric.
#[derive(Debug, Clone)]
pub struct Blur {
    n: usize,
    /// Per output index: source indices and weights after reflection.
    taps: Vec<Vec<(usize, f64)>>,
}

impl Blur {
    pub fn new(n: usize, size: usize, std: f64) -> Result<Self> {
        let w = gaussian_taps(size, std)?;
        let r = (size / 2) as isize;
        let period = 2 * n as isize;
        let fold = |m: isize| -> usize {
            let m = m.rem_euclid(period);
            (if m >= n as isize { period - 1 - m } else { m }) as usize
        };
        let taps = (0..n as isize)
            .map(|i| {
                let mut row: Vec<(usize, f64)> = Vec::new();
                for (t, wt) in w.iter().enumerate() {
                    let j = fold(i + t as isize - r);
                    match row.iter_mut().find(|e| e.0 == j) {
                        Some(e) => e.1 += wt,
                        None => row.push((j, *wt)),
                    }
                }
                row
            })
            .collect();
        Ok(Self { n, taps })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut tmp = vec![0.0; n * n];
        for i in 0..n {
            let row = &x[i * n..(i + 1) * n];
            for (j, taps) in self.taps.iter().enumerate() {
                tmp[i * n + j] = taps.iter().map(|&(s, w)| w * row[s]).sum();
            }
        }
        let mut out = vec![0.0; n * n];
        for (i, taps) in self.taps.iter().enumerate() {
            let dst = &mut out[i * n..(i + 1) * n];
            for &(s, w) in taps {
                let src = &tmp[s * n..(s + 1) * n];
                for (d, v) in dst.iter_mut().zip(src) {
                    *d += w * v;
                }
            }
        }
        out
    }
}

/// Piecewise-constant test picture: two rectangles and a disk on a dark
/// background, laid out relative to the side length.
pub fn synthetic_image(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut img = vec![0.1; n * n];
    for i in 0..n {
        for j in 0..n {
            let (u, v) = ((i as f64 + 0.5) / nf, (j as f64 + 0.5) / nf);
            let px = &mut img[i * n + j];
            if (0.15..0.55).contains(&u) && (0.1..0.45).contains(&v) {
                *px = 0.7;
            }
            if (0.6..0.9).contains(&u) && (0.2..0.8).contains(&v) {
                *px = 0.4;
            }
            if (u - 0.35).powi(2) + (v - 0.68).powi(2) < 0.18f64.powi(2) {
                *px = 0.95;
            }
        }
    }
    img
}

/// The assembled deblurring problem.
pub struct TvProblem {
    pub problem: CompositeProblem,
    pub oracle: TvDualProx,
    pub blur: Arc<Blur>,
    pub clean: Vec<f64>,
    pub observed: Vec<f64>,
}

impl TvProblem {
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

/// Builds `||A x - y||^2 + lambda TV(x)` with `y = A(source) + noise`.
/// Without a source image the synthetic picture is used.
pub fn build_tv_problem(inst: &TvInstance, source: Option<&[f64]>) -> Result<TvProblem> {
    let n = inst.image_side;
    if n < 3 {
        return Err(invalid(format!("image side must be at least 3, got {n}")));
    }
    if !(inst.lambda >= 0.0) || !(inst.noise_std >= 0.0) {
        return Err(invalid("lambda and noise std must be nonnegative"));
    }
    let clean = match source {
        Some(img) => {
            if img.len() != n * n {
                return Err(invalid(format!(
                    "source image has {} pixels, expected {}",
                    img.len(),
                    n * n
                )));
            }
            if img.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(invalid("source image must take values in [0, 1]"));
            }
            img.to_vec()
        }
        None => synthetic_image(n),
    };
    let blur = Arc::new(Blur::new(n, inst.kernel_size, inst.kernel_std)?);
    let mut observed = blur.apply(&clean);
    if inst.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(inst.seed);
        let normal = Normal::new(0.0, inst.noise_std).map_err(|e| invalid(e.to_string()))?;
        for v in observed.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }

    let op_norm_sq = {
        let b = Arc::clone(&blur);
        // A is symmetric, so A^T A x = A(A x).
        power_iteration(n * n, 100, |x| b.apply(&b.apply(x)))
    };
    let lipschitz = 2.0 * op_norm_sq * 1.01;

    let (b1, y1) = (Arc::clone(&blur), observed.clone());
    let eval_g = Arc::new(move |x: &[f64]| {
        b1.apply(x)
            .iter()
            .zip(&y1)
            .map(|(a, y)| (a - y) * (a - y))
            .sum::<f64>()
    });
    let (b2, y2) = (Arc::clone(&blur), observed.clone());
    let grad_g = Arc::new(move |x: &[f64]| {
        let r: Vec<f64> = b2
            .apply(x)
            .iter()
            .zip(&y2)
            .map(|(a, y)| 2.0 * (a - y))
            .collect();
        b2.apply(&r)
    });
    let oracle = TvDualProx {
        lambda: inst.lambda,
    };
    let eval_h = Arc::new(move |x: &[f64]| oracle.nonsmooth(x));
    let problem = CompositeProblem::new(n * n, lipschitz, eval_g, grad_g, eval_h)?;
    Ok(TvProblem {
        problem,
        oracle,
        blur,
        clean,
        observed,
    })
}
