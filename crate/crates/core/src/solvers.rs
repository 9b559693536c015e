//! Outer proximal-gradient loops.
//!
//! Each outer step takes a gradient step on `g` from `y_{k-1}` and hands the
//! result to a prox oracle, which is always cold-started. The number of inner
//! iterations comes from an [`InnerCountSource`].

use serde::{Deserialize, Serialize};

use crate::bounds::rate_bound;
use crate::error::{check_dim, invalid, Error, Result};
use crate::oracles::{prox_synthetic, ProxOracle};
use crate::problem::{CompositeProblem, CostModel, Trace, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Basic,
    Accelerated,
}

impl Scheme {
    /// Momentum weight applied after computing `x_k`.
    pub fn beta(self, k: usize) -> f64 {
        match self {
            Self::Basic => 0.0,
            Self::Accelerated => (k as f64 - 1.0) / (k as f64 + 2.0),
        }
    }
}

/// Chooses the inner iteration count for each outer step.
pub trait InnerCountSource {
    /// Inner count for outer step `k` (1-based). Must be at least 1.
    fn next_l(&mut self, k: usize) -> Result<usize>;

    /// Called after step `k` with `f(y_{k-1})` and `f(x_k)`.
    fn observe(&mut self, _k: usize, _f_before: f64, _f_after: f64) {}
}

impl<S: InnerCountSource + ?Sized> InnerCountSource for Box<S> {
    fn next_l(&mut self, k: usize) -> Result<usize> {
        (**self).next_l(k)
    }

    fn observe(&mut self, k: usize, f_before: f64, f_after: f64) {
        (**self).observe(k, f_before, f_after)
    }
}

/// Any combination of limits; the run stops as soon as one is hit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_outer: Option<usize>,
    /// The run stops before a step that would push the cost past this.
    pub cost_budget: Option<f64>,
    /// Stop once `f(x_k)` is at or below this value.
    pub objective_tol: Option<f64>,
}

impl StopRule {
    pub fn max_outer(k: usize) -> Self {
        Self {
            max_outer: Some(k),
            cost_budget: None,
            objective_tol: None,
        }
    }

    pub fn budget(cost: f64) -> Self {
        Self {
            max_outer: None,
            cost_budget: Some(cost),
            objective_tol: None,
        }
    }

    pub fn with_max_outer(mut self, k: usize) -> Self {
        self.max_outer = Some(k);
        self
    }

    pub fn with_budget(mut self, cost: f64) -> Self {
        self.cost_budget = Some(cost);
        self
    }

    pub fn with_objective_tol(mut self, target: f64) -> Self {
        self.objective_tol = Some(target);
        self
    }

    fn validate(&self) -> Result<()> {
        let budget_ok = self.cost_budget.is_some_and(f64::is_finite);
        if self.max_outer.is_none() && !budget_ok {
            // An objective target alone may never be reached.
            return Err(invalid("stop rule needs max_outer or a finite cost budget"));
        }
        Ok(())
    }
}

/// Final state of a run alongside its trace.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    pub x: Vec<f64>,
    pub x_avg: Vec<f64>,
}

pub fn run(
    problem: &CompositeProblem,
    oracle: &dyn ProxOracle,
    scheme: Scheme,
    source: &mut dyn InnerCountSource,
    costs: &CostModel,
    stop: &StopRule,
    x0: &[f64],
) -> Result<Trace> {
    run_detailed(problem, oracle, scheme, source, costs, stop, x0).map(|o| o.trace)
}

pub fn run_detailed(
    problem: &CompositeProblem,
    oracle: &dyn ProxOracle,
    scheme: Scheme,
    source: &mut dyn InnerCountSource,
    costs: &CostModel,
    stop: &StopRule,
    x0: &[f64],
) -> Result<RunOutput> {
    stop.validate()?;
    drive(
        problem,
        scheme,
        costs,
        stop,
        x0,
        source,
        |z, l, _| Ok(oracle.prox(z, problem.lipschitz(), l, None)?.point),
        |_| None,
    )
}

/// Runs `eps.len()` outer steps where step `i` returns a point whose prox gap
/// is exactly `eps[i]`. Each record carries the matching rate bound for
/// initial distance `r0`. Only the outer cost is charged.
pub fn run_with_synthetic_errors(
    problem: &CompositeProblem,
    exact: &dyn ProxOracle,
    scheme: Scheme,
    eps: &[f64],
    costs: &CostModel,
    x0: &[f64],
    r0: f64,
) -> Result<RunOutput> {
    if eps.is_empty() {
        return Err(invalid("error sequence must be nonempty"));
    }
    if let Some(e) = eps.iter().find(|e| !(**e >= 0.0)) {
        return Err(invalid(format!("prox errors must be nonnegative, got {e}")));
    }
    let stop = StopRule::max_outer(eps.len());
    let accelerated = scheme == Scheme::Accelerated;
    let lip = problem.lipschitz();
    let mut zero = ZeroInner;
    drive(
        problem,
        scheme,
        costs,
        &stop,
        x0,
        &mut zero,
        |z, _, k| Ok(prox_synthetic(z, lip, exact, eps[k - 1])?.point),
        |k| rate_bound(accelerated, &eps[..k], lip, r0).ok(),
    )
}

/// Synthetic runs perform no inner iterations.
struct ZeroInner;

impl InnerCountSource for ZeroInner {
    fn next_l(&mut self, _: usize) -> Result<usize> {
        Ok(0)
    }
}

#[allow(clippy::too_many_arguments)]
fn drive<P, B>(
    problem: &CompositeProblem,
    scheme: Scheme,
    costs: &CostModel,
    stop: &StopRule,
    x0: &[f64],
    source: &mut dyn InnerCountSource,
    mut prox: P,
    bound: B,
) -> Result<RunOutput>
where
    P: FnMut(&[f64], usize, usize) -> Result<Vec<f64>>,
    B: Fn(usize) -> Option<f64>,
{
    let n = problem.dim();
    check_dim(n, x0.len())?;
    let lip = problem.lipschitz();
    let mut x = x0.to_vec();
    let mut y = x0.to_vec();
    let mut sum = vec![0.0; n];
    let mut x_avg = x0.to_vec();
    let mut trace = Trace::default();
    let mut cum_cost = 0.0;
    let mut f_y = problem.objective(&y)?;

    for k in 1.. {
        if stop.max_outer.is_some_and(|m| k > m) {
            break;
        }
        let l = source.next_l(k)?;
        let step_cost = costs.step_cost(l);
        if stop.cost_budget.is_some_and(|b| cum_cost + step_cost > b) {
            break;
        }

        let grad = problem.smooth_gradient(&y)?;
        let z: Vec<f64> = y.iter().zip(&grad).map(|(a, g)| a - g / lip).collect();
        let x_new = prox(&z, l, k)?;
        check_dim(n, x_new.len())?;
        let f_x = problem.objective(&x_new)?;
        if !f_x.is_finite() {
            return Err(Error::Diverged {
                outer_index: k,
                partial: Box::new(trace),
            });
        }

        for (s, v) in sum.iter_mut().zip(&x_new) {
            *s += v;
        }
        for (a, s) in x_avg.iter_mut().zip(&sum) {
            *a = s / k as f64;
        }
        cum_cost += step_cost;
        trace.records.push(TraceRecord {
            outer_index: k,
            inner_used: l,
            cum_cost,
            objective: f_x,
            avg_objective: problem.objective(&x_avg)?,
            bound_value: bound(k),
        });
        source.observe(k, f_y, f_x);

        let beta = scheme.beta(k);
        if beta == 0.0 {
            y.clone_from(&x_new);
            f_y = f_x;
        } else {
            for ((yi, xn), xo) in y.iter_mut().zip(&x_new).zip(&x) {
                *yi = xn + beta * (xn - xo);
            }
            f_y = problem.objective(&y)?;
        }
        x = x_new;

        if stop.objective_tol.is_some_and(|t| f_x <= t) {
            break;
        }
    }
    Ok(RunOutput { trace, x, x_avg })
}
