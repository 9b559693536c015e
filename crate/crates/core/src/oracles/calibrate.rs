use super::{prox_objective, ProxOracle};
use crate::error::{invalid, Error, Result};
use crate::problem::ErrorModel;

/// Inner counts probed when the caller has no preference: 1, 2, 4, ..., 256.
pub const DEFAULT_CALIBRATION_COUNTS: [usize; 9] = [1, 2, 4, 8, 16, 32, 64, 128, 256];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateFamily {
    /// `A / l^alpha` with `alpha` known; only `A` is fitted.
    Sublinear { alpha: f64 },
    /// `A (1 - gamma)^l`; both `A` and `gamma` are fitted.
    Linear,
}

/// Fits an [`ErrorModel`] to observed prox gaps.
///
/// For each probe `(z, L)` and each `l` in `counts`, the gap of the oracle's
/// point against the exact prox is recorded. The model is fitted by least
/// squares in log space, then `A` is raised so that the fitted curve lies
/// above 95% of the observations (nearest-rank percentile of residuals).
/// Gaps that are zero or lost in rounding are discarded.
pub fn calibrate_error_model(
    oracle: &dyn ProxOracle,
    exact: &dyn ProxOracle,
    probes: &[(Vec<f64>, f64)],
    family: RateFamily,
    counts: &[usize],
) -> Result<ErrorModel> {
    if probes.len() < 2 {
        return Err(invalid("calibration needs at least two probes"));
    }
    if counts.iter().any(|&l| l < 1) {
        return Err(invalid("calibration inner counts must be >= 1"));
    }
    let mut obs: Vec<(f64, f64)> = Vec::new(); // (l, ln gap)
    for (z, lip) in probes {
        let p = exact.prox(z, *lip, 1, None)?.point;
        let best = prox_objective(exact, z, *lip, &p);
        let floor = 1e-13 * best.abs().max(1.0);
        for &l in counts {
            let x = oracle.prox(z, *lip, l, None)?.point;
            let gap = prox_objective(exact, z, *lip, &x) - best;
            if gap.is_finite() && gap > floor {
                obs.push((l as f64, gap.ln()));
            }
        }
    }
    if obs.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "only {} nonzero gaps observed; cannot take logs of zero",
            obs.len()
        )));
    }
    let n = obs.len() as f64;
    let mean_l = obs.iter().map(|o| o.0).sum::<f64>() / n;
    let var_l = obs.iter().map(|o| (o.0 - mean_l).powi(2)).sum::<f64>();
    if var_l == 0.0 {
        return Err(Error::DegenerateFit(
            "all usable observations share one inner count".into(),
        ));
    }

    match family {
        RateFamily::Sublinear { alpha } => {
            if !(alpha > 0.0) {
                return Err(invalid(format!("alpha must be positive, got {alpha}")));
            }
            // ln gap = ln A - alpha ln l; with alpha fixed each point yields ln A.
            let ln_a: Vec<f64> = obs.iter().map(|&(l, g)| g + alpha * l.ln()).collect();
            let mean = ln_a.iter().sum::<f64>() / n;
            let resid: Vec<f64> = ln_a.iter().map(|v| v - mean).collect();
            ErrorModel::sublinear((mean + percentile95(resid)).exp(), alpha)
        }
        RateFamily::Linear => {
            let mean_g = obs.iter().map(|o| o.1).sum::<f64>() / n;
            let cov = obs
                .iter()
                .map(|&(l, g)| (l - mean_l) * (g - mean_g))
                .sum::<f64>();
            let slope = cov / var_l;
            let intercept = mean_g - slope * mean_l;
            if !(slope < 0.0) {
                return Err(Error::DegenerateFit(format!(
                    "gaps do not decrease with l (log-slope {slope})"
                )));
            }
            let resid: Vec<f64> = obs
                .iter()
                .map(|&(l, g)| g - (intercept + slope * l))
                .collect();
            let gamma = -slope.exp_m1();
            ErrorModel::linear((intercept + percentile95(resid)).exp(), gamma)
                .map_err(|e| Error::DegenerateFit(e.to_string()))
        }
    }
}

fn percentile95(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let rank = (0.95 * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}
