//! Running several inner-count strategies on one benchmark.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use super::io::{read_trace_csv, write_trace_csv};
use super::Benchmark;
use crate::error::{invalid, Error, Result};
use crate::problem::{CostModel, ErrorModel, Plan, Trace};
use crate::solvers::{run, InnerCountSource, Scheme, StopRule};
use crate::strategies::{
    constant_source, convergent_source, planned_source, sip_source, StrategySpec,
};

/// What the stateful strategies need beyond their name.
#[derive(Debug, Clone, Default)]
pub struct StrategyContext {
    /// Inner error model, needed by `convergent`.
    pub model: Option<ErrorModel>,
    /// Scale of the convergent target; defaults to the model's `A`.
    pub convergent_scale: Option<f64>,
    /// Plan replayed by `planned`.
    pub plan: Option<Plan>,
}

type BoxedSource = Box<dyn InnerCountSource + Send>;

/// Builds the source for a strategy, with an outer-step cap when the
/// strategy has a natural end.
pub fn make_source(
    spec: StrategySpec,
    scheme: Scheme,
    ctx: &StrategyContext,
) -> Result<(BoxedSource, Option<usize>)> {
    Ok(match spec {
        StrategySpec::Constant(l) => (Box::new(constant_source(l)?), None),
        StrategySpec::Sip(tol) => (Box::new(sip_source(tol)?), None),
        StrategySpec::Convergent(delta) => {
            let model = ctx
                .model
                .ok_or_else(|| invalid("convergent strategy needs an error model"))?;
            let scale = ctx.convergent_scale.unwrap_or(model.a());
            (
                Box::new(convergent_source(scheme, model, delta, scale)?),
                None,
            )
        }
        StrategySpec::Planned => {
            let plan = ctx
                .plan
                .as_ref()
                .ok_or_else(|| invalid("planned strategy needs a plan"))?;
            (Box::new(planned_source(plan)), Some(plan.k_star))
        }
    })
}

#[derive(Debug, Clone)]
pub struct StrategyRun {
    pub strategy: StrategySpec,
    pub trace: Trace,
}

fn check_unique(strategies: &[StrategySpec]) -> Result<()> {
    let mut seen = HashSet::new();
    for s in strategies {
        if !seen.insert(s.to_string()) {
            return Err(invalid(format!("strategy '{s}' listed twice")));
        }
    }
    Ok(())
}

/// Runs every strategy until the next step would exceed `budget`.
/// Strategies run on separate threads; results keep the input order.
pub fn run_strategies(
    bench: &Benchmark,
    scheme: Scheme,
    strategies: &[StrategySpec],
    ctx: &StrategyContext,
    costs: &CostModel,
    budget: f64,
) -> Result<Vec<StrategyRun>> {
    check_unique(strategies)?;
    if !(budget > 0.0) {
        return Err(invalid(format!("budget must be positive, got {budget}")));
    }
    let one = |spec: StrategySpec| -> Result<StrategyRun> {
        let (mut source, cap) = make_source(spec, scheme, ctx)?;
        let mut stop = StopRule::budget(budget);
        if let Some(k) = cap {
            stop = stop.with_max_outer(k);
        }
        let trace = run(
            &bench.problem,
            bench.oracle.as_ref(),
            scheme,
            source.as_mut(),
            costs,
            &stop,
            &bench.x0,
        )?;
        Ok(StrategyRun {
            strategy: spec,
            trace,
        })
    };
    let workers = thread::available_parallelism().map_or(1, |n| n.get());
    if workers <= 1 || strategies.len() <= 1 {
        return strategies.iter().map(|&s| one(s)).collect();
    }
    thread::scope(|scope| {
        let handles: Vec<_> = strategies
            .iter()
            .map(|&s| scope.spawn(move || one(s)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("strategy thread panicked"))
            .collect()
    })
}

/// Smallest objective across the traces and an optional long reference run.
pub fn reference_optimum<'a>(
    traces: impl IntoIterator<Item = &'a Trace>,
    long_run: Option<f64>,
) -> f64 {
    traces
        .into_iter()
        .map(Trace::min_objective)
        .fold(long_run.unwrap_or(f64::INFINITY), f64::min)
}

/// [`reference_optimum`] over trace files on disk.
pub fn reference_optimum_from_files(paths: &[PathBuf], long_run: Option<f64>) -> Result<f64> {
    let traces = paths
        .iter()
        .map(|p| read_trace_csv(p).map(|(_, t)| t))
        .collect::<Result<Vec<_>>>()?;
    Ok(reference_optimum(&traces, long_run))
}

/// `count` gaps spaced evenly in log scale from `hi` down to `lo`.
pub fn log_grid(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count == 1 || hi <= lo {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Geometric midpoint of two gaps.
pub fn mid_gap(initial: f64, best: f64) -> f64 {
    (initial * best).sqrt()
}

/// Cost at which `trace` first gets within `gap` of `f_ref`.
pub fn cost_to_gap(trace: &Trace, f_ref: f64, gap: f64) -> Option<f64> {
    trace.cost_to_reach(f_ref + gap)
}

pub const SUMMARY_LEVELS: usize = 20;

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub runs: Vec<StrategyRun>,
    pub trace_files: Vec<PathBuf>,
    pub summary_file: Option<PathBuf>,
    pub reference: f64,
}

fn file_stem(spec: StrategySpec) -> String {
    spec.to_string().replace([':', '.'], "_")
}

/// Runs the strategies, writes one CSV per strategy and a summary of the
/// cost to reach each of [`SUMMARY_LEVELS`] log-spaced gaps above the
/// reference optimum. `meta` is copied into every file header.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    bench: &Benchmark,
    scheme: Scheme,
    strategies: &[StrategySpec],
    ctx: &StrategyContext,
    costs: &CostModel,
    budget: f64,
    out_dir: &Path,
    meta: &[(String, String)],
    long_run: Option<f64>,
) -> Result<SweepOutput> {
    let runs = run_strategies(bench, scheme, strategies, ctx, costs, budget)?;
    if runs.is_empty() {
        return Ok(SweepOutput {
            runs,
            trace_files: Vec::new(),
            summary_file: None,
            reference: long_run.unwrap_or(f64::INFINITY),
        });
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let mut header = meta.to_vec();
    header.push(("scheme".into(), format!("{scheme:?}").to_lowercase()));
    header.push(("budget".into(), format!("{budget:?}")));

    let mut trace_files = Vec::new();
    for r in &runs {
        let path = out_dir.join(format!("{}.csv", file_stem(r.strategy)));
        let mut h = header.clone();
        h.push(("strategy".into(), r.strategy.to_string()));
        write_trace_csv(&path, &r.trace, &h)?;
        trace_files.push(path);
    }

    let f_ref = reference_optimum(runs.iter().map(|r| &r.trace), long_run);
    let initial = bench.problem.objective(&bench.x0)? - f_ref;
    let best_positive = runs
        .iter()
        .map(|r| r.trace.min_objective() - f_ref)
        .filter(|g| *g > 0.0)
        .fold(f64::INFINITY, f64::min);
    let lo = if best_positive.is_finite() {
        best_positive
    } else {
        initial * 1e-12
    };
    let grid = log_grid(initial, lo, SUMMARY_LEVELS);

    let mut text = String::new();
    for (k, v) in &header {
        let _ = writeln!(text, "# {k}={v}");
    }
    let _ = writeln!(text, "# reference={f_ref:?}");
    text.push_str("strategy,gap,cost\n");
    for r in &runs {
        for &gap in &grid {
            let cost = cost_to_gap(&r.trace, f_ref, gap)
                .map(|c| format!("{c:?}"))
                .unwrap_or_default();
            let _ = writeln!(text, "{},{gap:?},{cost}", r.strategy);
        }
    }
    let summary = out_dir.join("summary.csv");
    fs::write(&summary, text).map_err(|e| Error::Io {
        path: summary.clone(),
        source: e,
    })?;
    Ok(SweepOutput {
        runs,
        trace_files,
        summary_file: Some(summary),
        reference: f_ref,
    })
}
