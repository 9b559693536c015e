//! Domain types shared by every other module: the composite problem, the
//! cost model, the inner-error model, schedules, traces and plans.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};

pub type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `min_x g(x) + h(x)` with `g` smooth (gradient `lipschitz`-Lipschitz) and
/// `h` convex, possibly non-smooth and possibly `+inf` outside its domain.
#[derive(Clone)]
pub struct CompositeProblem {
    dim: usize,
    lipschitz: f64,
    eval_g: ScalarFn,
    grad_g: VecFn,
    eval_h: ScalarFn,
}

impl fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl CompositeProblem {
    pub fn new(
        dim: usize,
        lipschitz: f64,
        eval_g: ScalarFn,
        grad_g: VecFn,
        eval_h: ScalarFn,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("problem dimension must be positive"));
        }
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(invalid(format!(
                "Lipschitz constant must be positive and finite, got {lipschitz}"
            )));
        }
        Ok(Self {
            dim,
            lipschitz,
            eval_g,
            grad_g,
            eval_h,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn smooth_value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok((self.eval_g)(x))
    }

    pub fn smooth_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok((self.grad_g)(x))
    }

    pub fn nonsmooth_value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok((self.eval_h)(x))
    }

    /// `f(x) = g(x) + h(x)`. Non-finite values are returned as-is.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok((self.eval_g)(x) + (self.eval_h)(x))
    }
}

/// Free-function form of [`CompositeProblem::objective`].
pub fn evaluate_objective(problem: &CompositeProblem, x: &[f64]) -> Result<f64> {
    problem.objective(x)
}

/// Unit costs of one inner and one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    c_in: f64,
    c_out: f64,
}

impl CostModel {
    pub fn new(c_in: f64, c_out: f64) -> Result<Self> {
        if !(c_in >= 0.0 && c_out >= 0.0 && c_in.is_finite() && c_out.is_finite()) {
            return Err(invalid(format!(
                "unit costs must be finite and nonnegative, got c_in={c_in}, c_out={c_out}"
            )));
        }
        if c_in == 0.0 && c_out == 0.0 {
            return Err(invalid("c_in and c_out cannot both be zero"));
        }
        Ok(Self { c_in, c_out })
    }

    /// `C_in = C_out = 1`, the setting of all reproduction experiments.
    pub fn unit() -> Self {
        Self {
            c_in: 1.0,
            c_out: 1.0,
        }
    }

    pub fn c_in(&self) -> f64 {
        self.c_in
    }

    pub fn c_out(&self) -> f64 {
        self.c_out
    }

    /// Cost of a single outer iteration running `inner` inner iterations.
    pub fn step_cost(&self, inner: usize) -> f64 {
        self.c_in * inner as f64 + self.c_out
    }
}

/// How the inner-solver error decays with the number of inner iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rate", rename_all = "snake_case")]
pub enum ErrorModel {
    /// `eps(l) = A / l^alpha`
    Sublinear { a: f64, alpha: f64 },
    /// `eps(l) = A (1 - gamma)^l`
    Linear { a: f64, gamma: f64 },
}

impl ErrorModel {
    pub fn sublinear(a: f64, alpha: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(format!(
                "sublinear model needs A > 0 and alpha > 0, got A={a}, alpha={alpha}"
            )));
        }
        Ok(Self::Sublinear { a, alpha })
    }

    pub fn linear(a: f64, gamma: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(gamma > 0.0 && gamma < 1.0) {
            return Err(invalid(format!(
                "linear model needs A > 0 and 0 < gamma < 1, got A={a}, gamma={gamma}"
            )));
        }
        Ok(Self::Linear { a, gamma })
    }

    pub fn a(&self) -> f64 {
        match *self {
            Self::Sublinear { a, .. } | Self::Linear { a, .. } => a,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Self::Linear { .. })
    }

    /// Real-valued extension of [`epsilon_of_l`], used by the relaxed planner.
    pub fn epsilon_at(&self, l: f64) -> f64 {
        match *self {
            Self::Sublinear { a, alpha } => a / l.powf(alpha),
            Self::Linear { a, gamma } => a * (1.0 - gamma).powf(l),
        }
    }
}

/// Error bound after `l >= 1` inner iterations.
pub fn epsilon_of_l(model: &ErrorModel, l: usize) -> Result<f64> {
    if l < 1 {
        return Err(invalid("inner iteration count must be at least 1"));
    }
    Ok(model.epsilon_at(l as f64))
}

/// Smallest `l >= 1` with `epsilon_of_l(model, l) <= eps`.
///
/// Saturates at `usize::MAX` when the requested accuracy is out of reach
/// in floating point.
pub fn l_of_epsilon(model: &ErrorModel, eps: f64) -> usize {
    if !(eps > 0.0) {
        return usize::MAX;
    }
    if eps >= model.a() {
        return 1;
    }
    let guess = match *model {
        ErrorModel::Sublinear { a, alpha } => (a / eps).powf(1.0 / alpha),
        ErrorModel::Linear { a, gamma } => (eps / a).ln() / (1.0 - gamma).ln(),
    };
    if !guess.is_finite() || guess >= 1e18 {
        return usize::MAX;
    }
    let mut l = (guess.ceil() as usize).max(1);
    let eps_at = |l: usize| model.epsilon_at(l as f64);
    // The closed form can be off by one in floating point.
    while l > 1 && eps_at(l - 1) <= eps {
        l -= 1;
    }
    while eps_at(l) > eps {
        l += 1;
    }
    l
}

/// Inner iteration counts `l_1, ..., l_k`, all at least one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Schedule(Vec<usize>);

impl Schedule {
    pub fn new(inner_counts: Vec<usize>) -> Result<Self> {
        if inner_counts.is_empty() {
            return Err(invalid(
                "schedule must contain at least one outer iteration",
            ));
        }
        if let Some(pos) = inner_counts.iter().position(|&l| l < 1) {
            return Err(invalid(format!(
                "schedule entry {} is zero; inner counts must be >= 1",
                pos + 1
            )));
        }
        Ok(Self(inner_counts))
    }

    pub fn constant(l: usize, k: usize) -> Result<Self> {
        Self::new(vec![l; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inner_counts(&self) -> &[usize] {
        &self.0
    }

    pub fn total_inner(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn concat(&self, other: &Schedule) -> Schedule {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Schedule(v)
    }
}

impl TryFrom<Vec<usize>> for Schedule {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Schedule> for Vec<usize> {
    fn from(s: Schedule) -> Self {
        s.0
    }
}

/// `C_in * sum(l_i) + k * C_out`.
pub fn schedule_cost(schedule: &Schedule, costs: &CostModel) -> f64 {
    costs.c_in * schedule.total_inner() as f64 + schedule.len() as f64 * costs.c_out
}

/// One outer iteration of a solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub outer_index: usize,
    pub inner_used: usize,
    pub cum_cost: f64,
    pub objective: f64,
    /// Objective at the running average of the iterates `x_1..x_k`.
    pub avg_objective: f64,
    pub bound_value: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The realized inner-count sequence, or `None` for an empty trace.
    pub fn realized_schedule(&self) -> Option<Schedule> {
        Schedule::new(self.records.iter().map(|r| r.inner_used).collect()).ok()
    }

    pub fn final_cost(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_cost)
    }

    pub fn min_objective(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.objective)
            .fold(f64::INFINITY, f64::min)
    }

    /// Running minimum of `objective`, one entry per record.
    pub fn min_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.records
            .iter()
            .map(|r| {
                best = best.min(r.objective);
                best
            })
            .collect()
    }

    /// Cumulative cost at which `objective` first drops to `level` or below.
    pub fn cost_to_reach(&self, level: f64) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.objective <= level)
            .map(|r| r.cum_cost)
    }
}

/// Outer scheme crossed with inner rate: the four planning scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    BasicSublinear,
    BasicLinear,
    AccelSublinear,
    AccelLinear,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::BasicSublinear,
        Scenario::BasicLinear,
        Scenario::AccelSublinear,
        Scenario::AccelLinear,
    ];

    pub fn is_accelerated(self) -> bool {
        matches!(self, Self::AccelSublinear | Self::AccelLinear)
    }

    pub fn is_linear(self) -> bool {
        matches!(self, Self::BasicLinear | Self::AccelLinear)
    }

    /// Short label used on the command line and in output files.
    pub fn label(self) -> &'static str {
        match self {
            Self::BasicSublinear => "bosi",
            Self::BasicLinear => "boli",
            Self::AccelSublinear => "aosi",
            Self::AccelLinear => "aoli",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bosi" | "basic_sublinear" | "1" => Ok(Self::BasicSublinear),
            "boli" | "basic_linear" | "2" => Ok(Self::BasicLinear),
            "aosi" | "accel_sublinear" | "3" => Ok(Self::AccelSublinear),
            "aoli" | "accel_linear" | "4" => Ok(Self::AccelLinear),
            other => Err(invalid(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Which branch of the planning analysis produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanCase {
    /// Small target accuracy: the bound constraint is active.
    Constrained,
    /// Large target accuracy: one inner iteration everywhere suffices.
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub scenario: Scenario,
    pub k_star: usize,
    pub schedule: Schedule,
    /// Continuous optimum the integer schedule was rounded from.
    pub relaxed: Vec<f64>,
    pub predicted_bound: f64,
    pub predicted_cost: f64,
    pub case: PlanCase,
}
