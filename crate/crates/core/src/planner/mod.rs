//! Cost-optimal choice of outer iterations and inner schedules.
//!
//! For a target accuracy `rho`, find the `k` and `l_1..l_k` minimizing
//! `C_in sum l_i + k C_out` subject to the parametric bound being at most
//! `rho`. When `rho` is large, one inner iteration per step suffices and only
//! `k` is chosen. Otherwise the inner counts are optimized over the reals in
//! closed form, the best `k` is searched numerically, and the schedule is
//! rounded back to integers.

mod relaxed;
mod round;
mod search;

use serde::{Deserialize, Serialize};

pub use relaxed::{f_lambda, n_of_k, relaxed_cost, relaxed_schedule};
pub use round::round_schedule;
pub use search::minimize_over_k;

use crate::bounds::{parametric_bound, BoundParams};
use crate::error::{invalid, Error, Result};
use crate::problem::{schedule_cost, CostModel, ErrorModel, Plan, PlanCase, Scenario, Schedule};

pub const DEFAULT_K_SEARCH_MAX: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub scenario: Scenario,
    /// Target accuracy.
    pub rho: f64,
    pub params: BoundParams,
    pub costs: CostModel,
    /// Largest number of outer iterations considered.
    pub k_search_max: usize,
}

impl PlanRequest {
    pub fn new(
        scenario: Scenario,
        rho: f64,
        params: BoundParams,
        costs: CostModel,
    ) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(invalid(format!(
                "rho must be positive and finite, got {rho}"
            )));
        }
        if scenario.is_linear() != params.model.is_linear() {
            return Err(invalid(format!(
                "scenario {} does not match error model {:?}",
                scenario.label(),
                params.model
            )));
        }
        Ok(Self {
            scenario,
            rho,
            params,
            costs,
            k_search_max: DEFAULT_K_SEARCH_MAX,
        })
    }

    pub fn with_k_search_max(mut self, k_max: usize) -> Self {
        self.k_search_max = k_max;
        self
    }
}

/// `sqrt(L) / (3 sqrt(2A))`
fn kappa(a: f64, lipschitz: f64) -> f64 {
    lipschitz.sqrt() / (3.0 * (2.0 * a).sqrt())
}

/// `C(k) = sqrt(L)/(3 sqrt(2A)) (sqrt(2 k rho / L) - R0)`; negative when
/// `k` outer steps cannot reach `rho` even with exact prox.
pub fn c_of_k(k: f64, req: &PlanRequest) -> f64 {
    let p = &req.params;
    kappa(p.model.a(), p.lipschitz) * ((2.0 * k * req.rho / p.lipschitz).sqrt() - p.r0)
}

/// `D(k) = sqrt(L)/(3 sqrt(2A)) (sqrt(rho / 2L) (k + 1) - R0)`
pub fn d_of_k(k: f64, req: &PlanRequest) -> f64 {
    let p = &req.params;
    kappa(p.model.a(), p.lipschitz) * ((req.rho / (2.0 * p.lipschitz)).sqrt() * (k + 1.0) - p.r0)
}

/// `A` as it enters the all-ones bound: `A (1 - gamma)` for linear rates.
fn effective_a(model: &ErrorModel) -> f64 {
    match *model {
        ErrorModel::Sublinear { a, .. } => a,
        ErrorModel::Linear { a, gamma } => a * (1.0 - gamma),
    }
}

/// Accuracy below which the bound constraint is active for every `k`.
///
/// Basic schemes: `6 sqrt(2 L A') R0`. Accelerated: `(sqrt(12 sqrt(2 L A') R0)
/// - 3 sqrt(A'))^2`, or 0 when the bracket is negative. `A'` is `A` for
/// sub-linear and `A (1 - gamma)` for linear inner rates.
pub fn threshold(scenario: Scenario, params: &BoundParams) -> Result<f64> {
    if scenario.is_linear() != params.model.is_linear() {
        return Err(invalid("scenario does not match error model"));
    }
    let a = effective_a(&params.model);
    let base = (2.0 * params.lipschitz * a).sqrt() * params.r0;
    if scenario.is_accelerated() {
        let inner = (12.0 * base).sqrt() - 3.0 * a.sqrt();
        Ok(if inner > 0.0 { inner * inner } else { 0.0 })
    } else {
        Ok(6.0 * base)
    }
}

/// Real interval of `k` where one inner iteration per step meets `rho`.
/// Returns `None` when the defining discriminant is negative.
pub fn case1_interval(req: &PlanRequest) -> Option<(f64, f64)> {
    let p = &req.params;
    let a = effective_a(&p.model);
    let kap = kappa(a, p.lipschitz);
    if req.scenario.is_accelerated() {
        let h = req.rho.sqrt() / (3.0 * a.sqrt());
        let big_k = 0.25 * (1.0 + h).powi(2) - 2.0 * kap * p.r0;
        if big_k < 0.0 {
            return None;
        }
        let mid = 0.5 * (h - 1.0);
        Some((mid - big_k.sqrt(), mid + big_k.sqrt()))
    } else {
        let h = req.rho.sqrt() / (6.0 * a.sqrt());
        let disc = req.rho / (36.0 * a) - kap * p.r0;
        if disc < 0.0 {
            return None;
        }
        Some(((h - disc.sqrt()).powi(2), (h + disc.sqrt()).powi(2)))
    }
}

fn bound_of(req: &PlanRequest, schedule: &Schedule) -> Result<f64> {
    parametric_bound(req.scenario, schedule.len(), schedule, &req.params)
}

/// Smallest `k >= 1` in the all-ones interval, confirmed against the bound.
pub fn case1_k(req: &PlanRequest) -> Result<usize> {
    let Some((lo, hi)) = case1_interval(req) else {
        return Err(Error::EmptyInterval {
            lower: f64::NAN,
            upper: f64::NAN,
        });
    };
    let empty = Error::EmptyInterval {
        lower: lo,
        upper: hi,
    };
    if hi < 1.0 - 1e-9 {
        return Err(empty);
    }
    let feasible =
        |k: usize| -> Result<bool> { Ok(bound_of(req, &Schedule::constant(1, k)?)? <= req.rho) };
    let start = (lo.ceil().max(1.0)) as usize;
    let stop = (hi.floor() as usize + 1).min(req.k_search_max);
    // Endpoints are computed in floating point; nudge by one either way.
    let mut k = start.saturating_sub(1).max(1);
    while k <= stop {
        if feasible(k)? {
            return Ok(k);
        }
        k += 1;
    }
    Err(empty)
}

fn k_min(req: &PlanRequest) -> usize {
    let p = &req.params;
    let k = if req.scenario.is_accelerated() {
        // D(k) > 0  <=>  k + 1 > sqrt(2L/rho) R0
        ((2.0 * p.lipschitz / req.rho).sqrt() * p.r0).floor()
    } else {
        // C(k) > 0  <=>  k > L R0^2 / (2 rho)
        (p.lipschitz * p.r0 * p.r0 / (2.0 * req.rho)).floor() + 1.0
    };
    if k >= usize::MAX as f64 {
        usize::MAX
    } else {
        (k as usize).max(1)
    }
}

/// Cost-optimal `(k*, l_1..l_k*)` for the request.
pub fn plan(req: &PlanRequest) -> Result<Plan> {
    let scenario = req.scenario;
    if scenario.is_linear() != req.params.model.is_linear() {
        return Err(invalid("scenario does not match error model"));
    }
    if req.rho >= threshold(scenario, &req.params)? {
        // Large rho: all-ones schedules. If no integer k fits the interval
        // the constraint is active everywhere and the relaxed path applies.
        if let Ok(k) = case1_k(req) {
            let schedule = Schedule::constant(1, k)?;
            return Ok(Plan {
                scenario,
                k_star: k,
                predicted_bound: bound_of(req, &schedule)?,
                predicted_cost: schedule_cost(&schedule, &req.costs),
                schedule,
                relaxed: vec![1.0; k],
                case: PlanCase::Unconstrained,
            });
        }
    }

    let lo = k_min(req);
    if lo > req.k_search_max {
        return Err(Error::Infeasible {
            reason: format!(
                "rho = {} needs more than {} outer iterations",
                req.rho, req.k_search_max
            ),
        });
    }
    let k = minimize_over_k(|k| relaxed_cost(scenario, k, req), lo, req.k_search_max)?;
    let (relaxed, ok) = relaxed_schedule(scenario, k, req)?;
    if !ok || relaxed.iter().any(|v| !(v.is_finite() && *v < 1e15)) {
        return Err(Error::Infeasible {
            reason: format!(
                "no finite schedule reaches rho = {} within the search range",
                req.rho
            ),
        });
    }
    let schedule = round_schedule(&relaxed, req)?;
    let predicted_bound = bound_of(req, &schedule)?;
    Ok(Plan {
        scenario,
        k_star: k,
        predicted_cost: schedule_cost(&schedule, &req.costs),
        predicted_bound,
        schedule,
        relaxed,
        case: PlanCase::Constrained,
    })
}
