//! Inexact proximal-gradient methods with planned inner-iteration budgets.
//!
//! The outer loop solves `min g(x) + h(x)` by proximal-gradient steps whose
//! prox is itself computed approximately by an inner solver. Given a model of
//! how fast the inner error decays, [`planner`] chooses how many outer
//! iterations to run and how many inner iterations to spend on each so that a
//! target accuracy is guaranteed at the least total cost.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod oracles;
pub mod planner;
pub mod problem;
pub mod solvers;
pub mod strategies;

pub use error::{Error, Result};
pub use oracles::{ProxOracle, ProxResult};
pub use planner::{plan, PlanRequest};
pub use problem::{
    epsilon_of_l, evaluate_objective, l_of_epsilon, schedule_cost, CompositeProblem, CostModel,
    ErrorModel, Plan, PlanCase, Scenario, Schedule, Trace, TraceRecord,
};
pub use solvers::{run, run_with_synthetic_errors, InnerCountSource, Scheme, StopRule};
