use super::PlanRequest;
use crate::bounds::parametric_bound;
use crate::error::{invalid, Result};
use crate::problem::Schedule;

/// Integer schedule from a relaxed one.
///
/// Starts from the ceiling of every entry, which is feasible because the
/// bound only improves with more inner work. Then, from `i = 1` on, each
/// entry is lowered to its floor; the first lowering that breaks the bound
/// is undone and the sweep stops there.
pub fn round_schedule(relaxed: &[f64], req: &PlanRequest) -> Result<Schedule> {
    if relaxed.is_empty() {
        return Err(invalid("relaxed schedule is empty"));
    }
    if let Some(v) = relaxed.iter().find(|v| !(v.is_finite() && **v < 1e15)) {
        return Err(invalid(format!(
            "relaxed inner count {v} cannot be rounded"
        )));
    }
    let k = relaxed.len();
    let mut l: Vec<usize> = relaxed.iter().map(|v| (v.ceil() as usize).max(1)).collect();
    let bound = |l: &[usize]| -> Result<f64> {
        parametric_bound(req.scenario, k, &Schedule::new(l.to_vec())?, &req.params)
    };

    // The ceiling can miss by rounding error right at the constraint.
    let mut tries = 0;
    while bound(&l)? > req.rho {
        tries += 1;
        if tries > 64 {
            return Err(invalid("ceiling of the relaxed schedule is not feasible"));
        }
        l.iter_mut().for_each(|v| *v += 1);
    }

    // The bound is (prefix + 3 * sum of weighted terms)^2; track the sum so
    // each trial costs O(1).
    let p = &req.params;
    let term = |i: usize, li: usize| -> f64 {
        let w = if req.scenario.is_accelerated() {
            (i + 1) as f64
        } else {
            1.0
        };
        w * (2.0 * p.model.epsilon_at(li as f64) / p.lipschitz).sqrt()
    };
    let kf = k as f64;
    let prefactor = if req.scenario.is_accelerated() {
        2.0 * p.lipschitz / ((kf + 1.0) * (kf + 1.0))
    } else {
        p.lipschitz / (2.0 * kf)
    };
    let mut sum: f64 = l.iter().enumerate().map(|(i, &li)| term(i, li)).sum();
    for i in 0..k {
        let floor = (relaxed[i].floor() as usize).max(1);
        if floor >= l[i] {
            continue;
        }
        let trial = sum - term(i, l[i]) + term(i, floor);
        let s = p.r0 + 3.0 * trial;
        if prefactor * s * s > req.rho {
            break;
        }
        l[i] = floor;
        sum = trial;
    }
    // Guard against drift in the running sum.
    while bound(&l)? > req.rho {
        match (0..k).find(|&i| (l[i] as f64) < relaxed[i].ceil()) {
            Some(i) => l[i] += 1,
            None => break,
        }
    }
    Schedule::new(l)
}
