//! Convergence bounds for inexact proximal-gradient methods.
//!
//! `rate_bound_*` take an arbitrary sequence of prox errors and are used to
//! validate runs. [`parametric_bound`] is the looser form with a single
//! factor 3 in front of the error sum, expressed through an [`ErrorModel`];
//! it is what the planner optimizes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::problem::{ErrorModel, Scenario, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub lipschitz: f64,
    /// `||x0 - x*||`
    pub r0: f64,
    pub model: ErrorModel,
}

impl BoundParams {
    pub fn new(lipschitz: f64, r0: f64, model: ErrorModel) -> Result<Self> {
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(invalid(format!("L must be positive, got {lipschitz}")));
        }
        if !(r0 >= 0.0 && r0.is_finite()) {
            return Err(invalid(format!("R0 must be nonnegative, got {r0}")));
        }
        Ok(Self {
            lipschitz,
            r0,
            model,
        })
    }
}

fn check_eps(eps: &[f64], lipschitz: f64, r0: f64) -> Result<()> {
    if eps.is_empty() {
        return Err(invalid("error sequence must be nonempty"));
    }
    if let Some(e) = eps.iter().find(|e| !(**e >= 0.0)) {
        return Err(invalid(format!("prox errors must be nonnegative, got {e}")));
    }
    if !(lipschitz > 0.0) || !(r0 >= 0.0) {
        return Err(invalid("need L > 0 and R0 >= 0"));
    }
    Ok(())
}

/// `(L/2k) (R0 + 2 sum sqrt(2 eps_i / L) + sqrt(sum 2 eps_i / L))^2`
///
/// Bounds `f(xbar_k) - f*` at the average of the first `k` iterates.
pub fn rate_bound_basic(eps: &[f64], lipschitz: f64, r0: f64) -> Result<f64> {
    check_eps(eps, lipschitz, r0)?;
    let k = eps.len() as f64;
    let lin: f64 = eps.iter().map(|e| (2.0 * e / lipschitz).sqrt()).sum();
    let quad: f64 = eps.iter().map(|e| 2.0 * e / lipschitz).sum();
    let s = r0 + 2.0 * lin + quad.sqrt();
    Ok(lipschitz / (2.0 * k) * s * s)
}

/// `(2L/(k+1)^2) (R0 + 2 sum i sqrt(2 eps_i / L) + sqrt(sum 2 i^2 eps_i / L))^2`
pub fn rate_bound_accelerated(eps: &[f64], lipschitz: f64, r0: f64) -> Result<f64> {
    check_eps(eps, lipschitz, r0)?;
    let k = eps.len() as f64;
    let mut lin = 0.0;
    let mut quad = 0.0;
    for (i, e) in eps.iter().enumerate() {
        let i = (i + 1) as f64;
        lin += i * (2.0 * e / lipschitz).sqrt();
        quad += 2.0 * i * i * e / lipschitz;
    }
    let s = r0 + 2.0 * lin + quad.sqrt();
    Ok(2.0 * lipschitz / ((k + 1.0) * (k + 1.0)) * s * s)
}

fn check_variant(scenario: Scenario, model: &ErrorModel) -> Result<()> {
    if scenario.is_linear() != model.is_linear() {
        return Err(invalid(format!(
            "scenario {} does not match error model {model:?}",
            scenario.label()
        )));
    }
    Ok(())
}

/// Parametric bound evaluated at real-valued inner counts.
pub fn parametric_bound_relaxed(
    scenario: Scenario,
    l: &[f64],
    params: &BoundParams,
) -> Result<f64> {
    check_variant(scenario, &params.model)?;
    if l.is_empty() {
        return Err(invalid("need at least one outer iteration"));
    }
    let lip = params.lipschitz;
    let k = l.len() as f64;
    let sum: f64 = l
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            let w = if scenario.is_accelerated() {
                (i + 1) as f64
            } else {
                1.0
            };
            w * (2.0 * params.model.epsilon_at(li) / lip).sqrt()
        })
        .sum();
    let s = params.r0 + 3.0 * sum;
    let prefactor = if scenario.is_accelerated() {
        2.0 * lip / ((k + 1.0) * (k + 1.0))
    } else {
        lip / (2.0 * k)
    };
    Ok(prefactor * s * s)
}

/// `B_j(k, {l_i})` for the scenario's outer scheme and inner rate.
pub fn parametric_bound(
    scenario: Scenario,
    k: usize,
    schedule: &Schedule,
    params: &BoundParams,
) -> Result<f64> {
    if schedule.len() != k {
        return Err(invalid(format!(
            "schedule has {} entries but k = {k}",
            schedule.len()
        )));
    }
    let l: Vec<f64> = schedule.inner_counts().iter().map(|&v| v as f64).collect();
    parametric_bound_relaxed(scenario, &l, params)
}

/// Bound matching the scheme of a run: basic or accelerated.
pub fn rate_bound(accelerated: bool, eps: &[f64], lipschitz: f64, r0: f64) -> Result<f64> {
    if accelerated {
        rate_bound_accelerated(eps, lipschitz, r0)
    } else {
        rate_bound_basic(eps, lipschitz, r0)
    }
}
