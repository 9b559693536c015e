//! Continuous optimal inner counts for a fixed number of outer iterations.

use statrs::function::gamma::ln_gamma;

use super::{c_of_k, d_of_k, PlanRequest};
use crate::error::{invalid, Result};
use crate::problem::{ErrorModel, Scenario};

/// `sqrt(1 - gamma)` and `c = ln sqrt(1 / (1 - gamma))`.
pub(crate) fn linear_consts(gamma: f64) -> (f64, f64) {
    ((1.0 - gamma).sqrt(), -0.5 * (1.0 - gamma).ln())
}

fn gamma_of(model: &ErrorModel) -> Result<f64> {
    match *model {
        ErrorModel::Linear { gamma, .. } => Ok(gamma),
        ErrorModel::Sublinear { .. } => Err(invalid("linear-rate scenario needs a linear model")),
    }
}

fn alpha_of(model: &ErrorModel) -> Result<f64> {
    match *model {
        ErrorModel::Sublinear { alpha, .. } => Ok(alpha),
        ErrorModel::Linear { .. } => Err(invalid("sub-linear scenario needs a sub-linear model")),
    }
}

/// Breakpoint for the accelerated/linear scenario: the unique `n` in `1..=k`
/// with `(n-1)(2k+2-n) s <= 2D < n(2k+1-n) s`, where `s = sqrt(1 - gamma)`.
pub fn n_of_k(k: usize, d_k: f64, gamma: f64) -> Result<usize> {
    if k == 0 || !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("need k >= 1 and 0 < gamma < 1"));
    }
    let s = (1.0 - gamma).sqrt();
    let kf = k as f64;
    let upper = 0.5 * kf * (kf + 1.0) * s;
    if !(d_k > 0.0 && d_k < upper) {
        return Err(invalid(format!(
            "D = {d_k} outside (0, {upper}) for k = {k}, gamma = {gamma}"
        )));
    }
    // n(2k+1-n) is increasing on 1..=k; find the first n where it exceeds 2D/s.
    let g = |n: usize| n as f64 * (2.0 * kf + 1.0 - n as f64) * s;
    let (mut lo, mut hi) = (1usize, k);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if 2.0 * d_k < g(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// `F(lambda)`: the constraint value `sum_i i (1-gamma)^{l_i/2}` reached by
/// the KKT point for multiplier `lambda`, where coordinates with
/// `i lambda s c < 1` sit at the bound `l_i = 1`. Its level sets pick the
/// multiplier matching a given `D`.
pub fn f_lambda(lambda: f64, k: usize, gamma: f64) -> f64 {
    let (s, c) = linear_consts(gamma);
    let kf = k as f64;
    let m = (1.0 / (lambda * s * c)).ceil().clamp(1.0, kf + 1.0);
    m * (m - 1.0) * s / 2.0 + (kf - m + 1.0) / (lambda * c)
}

/// Continuous optimum `l_1..l_k` for the scenario at fixed `k`, each at
/// least 1, with a flag that is false when `k` cannot reach `rho` at all
/// (non-positive `C(k)` or `D(k)`).
pub fn relaxed_schedule(
    scenario: Scenario,
    k: usize,
    req: &PlanRequest,
) -> Result<(Vec<f64>, bool)> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let model = &req.params.model;
    let kf = k as f64;
    let margin = if scenario.is_accelerated() {
        d_of_k(kf, req)
    } else {
        c_of_k(kf, req)
    };
    if !(margin > 0.0) {
        return Ok((vec![f64::INFINITY; k], false));
    }
    let l = match scenario {
        Scenario::BasicSublinear => {
            let alpha = alpha_of(model)?;
            vec![(margin / kf).powf(-2.0 / alpha).max(1.0); k]
        }
        Scenario::BasicLinear => {
            let gamma = gamma_of(model)?;
            vec![(2.0 * (margin / kf).ln() / (1.0 - gamma).ln()).max(1.0); k]
        }
        Scenario::AccelSublinear => {
            let alpha = alpha_of(model)?;
            let v = (2.0 * margin / (kf * (kf + 1.0))).powf(-2.0 / alpha);
            vec![v.max(1.0); k]
        }
        Scenario::AccelLinear => {
            let gamma = gamma_of(model)?;
            accel_linear(k, margin, gamma)?
        }
    };
    Ok((l, true))
}

fn accel_linear(k: usize, d: f64, gamma: f64) -> Result<Vec<f64>> {
    let (s, c) = linear_consts(gamma);
    let kf = k as f64;
    if d >= 0.5 * kf * (kf + 1.0) * s {
        return Ok(vec![1.0; k]);
    }
    let n = n_of_k(k, d, gamma)?;
    let nf = n as f64;
    let lambda = (kf + 1.0 - nf) / ((d - nf * (nf - 1.0) * s / 2.0) * c);
    Ok((1..=k)
        .map(|i| {
            if i < n {
                1.0
            } else {
                ((i as f64 * lambda * c).ln() / c).max(1.0)
            }
        })
        .collect())
}

/// `C_in sum_i l_i + k C_out` at the relaxed optimum for this `k`;
/// `+inf` when `k` is infeasible.
pub fn relaxed_cost(scenario: Scenario, k: usize, req: &PlanRequest) -> f64 {
    let (c_in, c_out) = (req.costs.c_in(), req.costs.c_out());
    let kf = k as f64;
    if scenario == Scenario::AccelLinear {
        // Closed form avoids an O(k) sum inside the k search.
        let ErrorModel::Linear { gamma, .. } = req.params.model else {
            return f64::INFINITY;
        };
        let d = d_of_k(kf, req);
        if !(d > 0.0) {
            return f64::INFINITY;
        }
        let (s, c) = linear_consts(gamma);
        if d >= 0.5 * kf * (kf + 1.0) * s {
            return kf * (c_in + c_out);
        }
        let Ok(n) = n_of_k(k, d, gamma) else {
            return f64::INFINITY;
        };
        let nf = n as f64;
        let sum_l = (nf - 1.0)
            + (kf - nf + 1.0) / c * ((kf + 1.0 - nf) / (d - nf * (nf - 1.0) * s / 2.0)).ln()
            + (ln_gamma(kf + 1.0) - ln_gamma(nf)) / c;
        return kf * c_out + c_in * sum_l;
    }
    match relaxed_schedule(scenario, k, req) {
        Ok((l, true)) => kf * c_out + c_in * l[0] * kf,
        _ => f64::INFINITY,
    }
}
