use super::{ProxOracle, ProxResult};
use crate::error::{invalid, Result};
use crate::linalg::dist;
use crate::problem::ErrorModel;

/// A point whose prox-objective gap is exactly `target_eps`.
///
/// Starting from the exact prox point `p`, walks along a fixed unit direction
/// `u` (towards `z`, or `e_1` if `z = p`) and bisects on the step `t`. The gap
/// along the ray is `(L/2)(t^2 + 2t<u, p - z>) + h(p + tu) - h(p)`, which is
/// increasing in `t` and reaches `target_eps` no later than `sqrt(2 eps / L)`.
pub fn prox_synthetic(
    z: &[f64],
    lipschitz: f64,
    exact: &dyn ProxOracle,
    target_eps: f64,
) -> Result<ProxResult> {
    if !(target_eps >= 0.0) || !target_eps.is_finite() {
        return Err(invalid(format!(
            "target epsilon must be finite and nonnegative, got {target_eps}"
        )));
    }
    if !(lipschitz > 0.0) {
        return Err(invalid(format!("L must be positive, got {lipschitz}")));
    }
    let p = exact.prox(z, lipschitz, 1, None)?.point;
    if target_eps == 0.0 {
        return Ok(ProxResult {
            point: p,
            inner_used: 0,
            epsilon_bound: Some(0.0),
            dual: None,
        });
    }

    let d = dist(z, &p);
    let u: Vec<f64> = if d > 0.0 {
        z.iter().zip(&p).map(|(a, b)| (a - b) / d).collect()
    } else {
        let mut e = vec![0.0; z.len()];
        e[0] = 1.0;
        e
    };
    let at = |t: f64| -> Vec<f64> { p.iter().zip(&u).map(|(a, b)| a + t * b).collect() };
    // Evaluated on the rounded point itself: |x-z|^2 - |p-z|^2 = <x-p, x+p-2z>.
    let gap = |t: f64| -> f64 {
        let x = at(t);
        let quad: f64 = x
            .iter()
            .zip(&p)
            .zip(z)
            .map(|((xi, pi), zi)| (xi - pi) * (xi + pi - 2.0 * zi))
            .sum();
        0.5 * lipschitz * quad + exact.nonsmooth_diff(&x, &p)
    };

    let (mut lo, mut hi) = (0.0f64, (2.0 * target_eps / lipschitz).sqrt());
    // Guard against the bracket end falling just short in floating point.
    for _ in 0..64 {
        if gap(hi) >= target_eps {
            break;
        }
        hi *= 2.0;
    }
    if !(gap(hi) >= target_eps) {
        return Err(invalid(format!(
            "cannot bracket a prox gap of {target_eps} along the search ray"
        )));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if gap(mid) < target_eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = if (gap(lo) - target_eps).abs() <= (gap(hi) - target_eps).abs() {
        lo
    } else {
        hi
    };
    Ok(ProxResult {
        point: at(t),
        inner_used: 0,
        epsilon_bound: Some(target_eps),
        dual: None,
    })
}

/// Wraps an exact oracle so that `l` inner iterations produce a point with
/// gap exactly `eps(l)` under a given error model.
pub struct SyntheticOracle<O> {
    exact: O,
    model: ErrorModel,
}

impl<O: ProxOracle> SyntheticOracle<O> {
    pub fn new(exact: O, model: ErrorModel) -> Self {
        Self { exact, model }
    }

    pub fn model(&self) -> &ErrorModel {
        &self.model
    }
}

impl<O: ProxOracle> ProxOracle for SyntheticOracle<O> {
    fn nonsmooth(&self, x: &[f64]) -> f64 {
        self.exact.nonsmooth(x)
    }

    fn nonsmooth_diff(&self, x: &[f64], y: &[f64]) -> f64 {
        self.exact.nonsmooth_diff(x, y)
    }

    fn prox(
        &self,
        z: &[f64],
        lipschitz: f64,
        inner: usize,
        _: Option<&[f64]>,
    ) -> Result<ProxResult> {
        let eps = crate::problem::epsilon_of_l(&self.model, inner)?;
        let mut r = prox_synthetic(z, lipschitz, &self.exact, eps)?;
        r.inner_used = inner;
        Ok(r)
    }
}
