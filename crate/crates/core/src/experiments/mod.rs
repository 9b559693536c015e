//! Benchmark instances, strategy sweeps and their file formats.

pub mod graph;
pub mod io;
pub mod lasso;
pub mod sweep;
pub mod tv;

use std::sync::Arc;

use crate::error::Result;
use crate::oracles::{calibrate_error_model, LongRun, ProxOracle, RateFamily};
use crate::problem::{CompositeProblem, CostModel, ErrorModel};
use crate::solvers::{run_detailed, InnerCountSource, RunOutput, Scheme, StopRule};

pub use graph::{build_graph_problem, GraphInstance, GraphProblem};
pub use io::{read_pgm, read_trace_csv, write_pgm, write_trace_csv, Image};
pub use lasso::desk_lasso;
pub use sweep::{
    reference_optimum, run_strategies, sweep, StrategyContext, StrategyRun, SweepOutput,
};
pub use tv::{build_tv_problem, TvInstance, TvProblem};

/// A problem, its prox oracle and a starting point.
#[derive(Clone)]
pub struct Benchmark {
    pub name: String,
    pub problem: CompositeProblem,
    pub oracle: Arc<dyn ProxOracle>,
    pub x0: Vec<f64>,
    pub seed: u64,
}

impl std::fmt::Debug for Benchmark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Benchmark")
            .field("name", &self.name)
            .field("problem", &self.problem)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

/// Budgets used by the benchmark commands.
pub fn default_budget(scheme: Scheme, desk: bool) -> f64 {
    match (desk, scheme) {
        (true, _) => 1e5,
        (false, Scheme::Basic) => 1e6,
        (false, Scheme::Accelerated) => 5e4,
    }
}

/// Inner iterations that stand in for an exact prox on the iterative oracles.
pub const REFERENCE_INNER: usize = 2000;

struct Fixed(usize);

impl InnerCountSource for Fixed {
    fn next_l(&mut self, _: usize) -> Result<usize> {
        Ok(self.0)
    }
}

/// Runs `outer` accelerated steps, each with `inner` oracle iterations.
/// The minimum objective along the run serves as a reference optimum.
pub fn reference_run(bench: &Benchmark, outer: usize, inner: usize) -> Result<RunOutput> {
    run_detailed(
        &bench.problem,
        bench.oracle.as_ref(),
        Scheme::Accelerated,
        &mut Fixed(inner),
        &CostModel::unit(),
        &StopRule::max_outer(outer),
        &bench.x0,
    )
}

/// Prox inputs `z = x - grad g(x) / L` at `x0` and at the next `extra`
/// iterates of a near-exact basic run.
pub fn calibration_probes(bench: &Benchmark, extra: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let p = &bench.problem;
    let lip = p.lipschitz();
    let exact = LongRun::new(Arc::clone(&bench.oracle), REFERENCE_INNER);
    let mut x = bench.x0.clone();
    let mut probes = Vec::with_capacity(extra + 1);
    for step in 0..=extra {
        let g = p.smooth_gradient(&x)?;
        let z: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - b / lip).collect();
        if step < extra {
            x = exact.prox(&z, lip, 0, None)?.point;
        }
        probes.push((z, lip));
    }
    Ok(probes)
}

/// Fits the inner error model of a benchmark's oracle.
pub fn calibrate_benchmark(
    bench: &Benchmark,
    family: RateFamily,
    counts: &[usize],
) -> Result<ErrorModel> {
    let probes = calibration_probes(bench, 2)?;
    let exact = LongRun::new(Arc::clone(&bench.oracle), REFERENCE_INNER);
    calibrate_error_model(bench.oracle.as_ref(), &exact, &probes, family, counts)
}
