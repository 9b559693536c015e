//! Isotropic total variation on square images and its prox, computed by
//! projected gradient on the dual.
//!
//! Images are row-major `n x n`. Dual fields hold two planes of `n*n`
//! entries: vertical differences first, then horizontal ones.

use super::{ProxOracle, ProxResult};
use crate::error::{check_dim, invalid, Result};

pub(crate) fn side_of(len: usize) -> Result<usize> {
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len || n == 0 {
        return Err(invalid(format!(
            "image length {len} is not a positive square"
        )));
    }
    Ok(n)
}

/// Forward differences; zero across the last row and last column.
pub fn gradient(x: &[f64], n: usize) -> Vec<f64> {
    let mut g = vec![0.0; 2 * n * n];
    let (gv, gh) = g.split_at_mut(n * n);
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            if i + 1 < n {
                gv[k] = x[k + n] - x[k];
            }
            if j + 1 < n {
                gh[k] = x[k + 1] - x[k];
            }
        }
    }
    g
}

/// Negative adjoint of [`gradient`].
pub fn divergence(p: &[f64], n: usize) -> Vec<f64> {
    let (pv, ph) = p.split_at(n * n);
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let mut v = 0.0;
            if i + 1 < n {
                v += pv[k];
            }
            if i > 0 {
                v -= pv[k - n];
            }
            if j + 1 < n {
                v += ph[k];
            }
            if j > 0 {
                v -= ph[k - 1];
            }
            d[k] = v;
        }
    }
    d
}

/// `sum_{i,j} ||(grad x)_{i,j}||_2`
pub fn total_variation(x: &[f64], n: usize) -> f64 {
    let g = gradient(x, n);
    let (gv, gh) = g.split_at(n * n);
    gv.iter().zip(gh).map(|(a, b)| a.hypot(*b)).sum()
}

/// Approximate prox of `lambda * TV` after `l` dual projected-gradient steps.
/// Returns the best primal iterate, so the gap never grows with `l`.
///
/// With `mu = lambda / L` the dual is `min_{|p_ij| <= 1} 0.5 ||z + mu div p||^2`
/// and the primal point is `z + mu div p`. The iteration is carried out on
/// `q = mu p` with step 1/8, the Lipschitz constant of `grad . div`.
/// `warm` and the returned dual are in the unit-ball scaling `p`.
pub fn prox_tv_dual(
    z: &[f64],
    lipschitz: f64,
    lambda: f64,
    l: usize,
    warm: Option<&[f64]>,
) -> Result<ProxResult> {
    let n = side_of(z.len())?;
    if !(lipschitz > 0.0) {
        return Err(invalid(format!("L must be positive, got {lipschitz}")));
    }
    if !(lambda >= 0.0) {
        return Err(invalid(format!("lambda must be nonnegative, got {lambda}")));
    }
    let m = n * n;
    let mu = lambda / lipschitz;
    let mut q = match warm {
        Some(w) => {
            check_dim(2 * m, w.len())?;
            w.iter().map(|v| v * mu).collect()
        }
        None => vec![0.0; 2 * m],
    };
    if mu == 0.0 {
        return Ok(ProxResult {
            point: z.to_vec(),
            inner_used: l,
            epsilon_bound: None,
            dual: Some(vec![0.0; 2 * m]),
        });
    }

    let primal = |q: &[f64]| -> Vec<f64> {
        let d = divergence(q, n);
        z.iter().zip(&d).map(|(a, b)| a + b).collect()
    };
    // Prox objective of x given its gradient field.
    let value = |x: &[f64], g: &[f64]| -> f64 {
        let (gv, gh) = g.split_at(m);
        let tv: f64 = gv.iter().zip(gh).map(|(a, b)| (a * a + b * b).sqrt()).sum();
        let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
        0.5 * lipschitz * d2 + lambda * tv
    };
    // Dual steps do not decrease the primal gap monotonically, so the best
    // primal iterate seen is returned together with its dual.
    let mut best = (f64::INFINITY, Vec::new(), Vec::new());
    for step in 0..=l {
        let x = primal(&q);
        let g = gradient(&x, n);
        let v = value(&x, &g);
        if best.1.is_empty() || v < best.0 {
            best = (v, x, q.clone());
        }
        if step == l {
            break;
        }
        let (qv, qh) = q.split_at_mut(m);
        for k in 0..m {
            let a = qv[k] + g[k] / 8.0;
            let b = qh[k] + g[m + k] / 8.0;
            let r = (a * a + b * b).sqrt();
            let s = if r > mu { mu / r } else { 1.0 };
            qv[k] = a * s;
            qh[k] = b * s;
        }
    }
    let (_, point, q) = best;
    Ok(ProxResult {
        point,
        inner_used: l,
        epsilon_bound: None,
        dual: Some(q.into_iter().map(|v| v / mu).collect()),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct TvDualProx {
    pub lambda: f64,
}

impl ProxOracle for TvDualProx {
    fn nonsmooth(&self, x: &[f64]) -> f64 {
        match side_of(x.len()) {
            Ok(n) => self.lambda * total_variation(x, n),
            Err(_) => f64::NAN,
        }
    }

    fn nonsmooth_diff(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = match side_of(x.len()) {
            Ok(n) if y.len() == x.len() => n,
            _ => return f64::NAN,
        };
        let (gx, gy) = (gradient(x, n), gradient(y, n));
        let m = n * n;
        let d: f64 = (0..m)
            .map(|k| gx[k].hypot(gx[m + k]) - gy[k].hypot(gy[m + k]))
            .sum();
        self.lambda * d
    }

    fn prox(
        &self,
        z: &[f64],
        lipschitz: f64,
        inner: usize,
        warm: Option<&[f64]>,
    ) -> Result<ProxResult> {
        prox_tv_dual(z, lipschitz, self.lambda, inner, warm)
    }
}
