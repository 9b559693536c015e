//! `proxtrade` command-line front end.

mod config;
mod presets;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use proxtrade::bounds::BoundParams;
use proxtrade::experiments::io::trace_to_csv;
use proxtrade::experiments::sweep::{cost_to_gap, make_source, mid_gap};
use proxtrade::experiments::{default_budget, reference_run, sweep, StrategyContext};
use proxtrade::strategies::StrategySpec;
use proxtrade::{plan, CostModel, ErrorModel, PlanRequest, Scenario, Scheme, StopRule};

use presets::{InstanceArgs, Preset, SchemeArg};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] proxtrade::Error),
    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser)]
#[command(
    name = "proxtrade",
    version,
    about = "Cost-aware inexact proximal-gradient runs"
)]
struct Cli {
    /// JSON file with option values; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cost-optimal outer and inner iteration counts for a target accuracy.
    Plan(PlanArgs),
    /// Run one strategy on a preset and write its trace as CSV.
    Solve(SolveArgs),
    /// Run several strategies on a preset; one CSV each plus a summary.
    Sweep(SweepArgs),
    /// Deblurring benchmark, both schemes.
    BenchTv(BenchArgs),
    /// Graph labeling benchmark, both schemes.
    BenchGraph(BenchArgs),
    /// Fit the inner-error model of a preset's prox oracle.
    Calibrate(CalibrateArgs),
}

/// Error model and planning inputs shared by several subcommands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct ModelArgs {
    /// Error constant A.
    #[arg(long)]
    a: Option<f64>,
    /// Sub-linear exponent: eps(l) = A / l^alpha.
    #[arg(long, conflicts_with = "gamma")]
    alpha: Option<f64>,
    /// Linear rate: eps(l) = A (1 - gamma)^l.
    #[arg(long)]
    gamma: Option<f64>,
    /// Rate family fitted when A is not given: sublinear[:ALPHA] or linear.
    #[arg(long)]
    family: Option<String>,
}

impl ModelArgs {
    fn explicit(&self) -> Result<Option<ErrorModel>, CliError> {
        let Some(a) = self.a else {
            if self.alpha.is_some() || self.gamma.is_some() {
                return Err(CliError::Usage("--alpha/--gamma need --a".into()));
            }
            return Ok(None);
        };
        Ok(Some(match (self.alpha, self.gamma) {
            (Some(alpha), None) => ErrorModel::sublinear(a, alpha)?,
            (None, Some(gamma)) => ErrorModel::linear(a, gamma)?,
            (None, None) => return Err(CliError::Usage("--a needs --alpha or --gamma".into())),
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "give only one of --alpha and --gamma".into(),
                ))
            }
        }))
    }

    fn family(&self) -> &str {
        self.family.as_deref().unwrap_or("sublinear:1")
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct CostArgs {
    /// Cost of one inner iteration.
    #[arg(long)]
    c_in: Option<f64>,
    /// Cost of one outer iteration.
    #[arg(long)]
    c_out: Option<f64>,
}

impl CostArgs {
    fn model(&self) -> Result<CostModel, CliError> {
        Ok(CostModel::new(
            self.c_in.unwrap_or(1.0),
            self.c_out.unwrap_or(1.0),
        )?)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct PlanArgs {
    /// bosi, boli, aosi or aoli (basic/accelerated outer, sub-linear/linear inner).
    #[arg(long)]
    scenario: Option<String>,
    /// Target accuracy.
    #[arg(long)]
    rho: Option<f64>,
    /// Lipschitz constant of the smooth gradient.
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Distance from the starting point to a minimizer.
    #[arg(long)]
    r0: Option<f64>,
    /// Largest number of outer iterations considered.
    #[arg(long)]
    k_max: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    costs: CostArgs,
}

fn require<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| {
        CliError::Usage(format!(
            "missing --{name} (or \"{}\" in the config file)",
            name.replace('-', "_")
        ))
    })
}

fn plan_request(
    args: &PlanArgs,
    scenario: Scenario,
    model: ErrorModel,
    lipschitz: f64,
) -> Result<PlanRequest, CliError> {
    let params = BoundParams::new(lipschitz, require(args.r0, "r0")?, model)?;
    let mut req = PlanRequest::new(
        scenario,
        require(args.rho, "rho")?,
        params,
        args.costs.model()?,
    )?;
    if let Some(k) = args.k_max {
        req = req.with_k_search_max(k);
    }
    Ok(req)
}

fn cmd_plan(args: PlanArgs) -> Result<(), CliError> {
    let scenario: Scenario = require(args.scenario.as_deref(), "scenario")?.parse()?;
    let model = args
        .model
        .explicit()?
        .ok_or_else(|| CliError::Usage("plan needs --a with --alpha or --gamma".into()))?;
    let req = plan_request(
        &args,
        scenario,
        model,
        require(args.lipschitz, "lipschitz")?,
    )?;
    let p = plan(&req)?;
    print_json(&p)
}

fn print_json<T: Serialize>(v: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).expect("plain data serializes");
    writeln!(std::io::stdout(), "{text}").map_err(|source| CliError::Io {
        path: "<stdout>".into(),
        source,
    })
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct RunArgs {
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Total cost at which runs stop.
    #[arg(long)]
    budget: Option<f64>,
    /// Target accuracy for the `planned` strategy.
    #[arg(long)]
    rho: Option<f64>,
    /// Initial distance to a minimizer for the `planned` strategy.
    #[arg(long)]
    r0: Option<f64>,
    /// Target scale of the `convergent` strategy (default: the model's A).
    #[arg(long)]
    convergent_scale: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    costs: CostArgs,
}

impl RunArgs {
    fn scheme(&self) -> Scheme {
        self.scheme.unwrap_or(SchemeArg::Basic).into()
    }

    fn budget(&self) -> f64 {
        self.budget
            .unwrap_or_else(|| default_budget(self.scheme(), self.instance.desk))
    }

    fn meta(&self, preset: Preset) -> Vec<(String, String)> {
        vec![
            ("preset".into(), format!("{preset:?}").to_lowercase()),
            ("seed".into(), self.instance.seed().to_string()),
        ]
    }

    /// Builds the context the listed strategies need, fitting the error
    /// model only when one of them uses it.
    fn context(
        &self,
        bench: &proxtrade::experiments::Benchmark,
        strategies: &[StrategySpec],
    ) -> Result<StrategyContext, CliError> {
        let needs_model = strategies
            .iter()
            .any(|s| matches!(s, StrategySpec::Convergent(_) | StrategySpec::Planned));
        let mut ctx = StrategyContext {
            convergent_scale: self.convergent_scale,
            ..Default::default()
        };
        if !needs_model {
            return Ok(ctx);
        }
        let model = match self.model.explicit()? {
            Some(m) => m,
            None => presets::calibrate(bench, self.model.family())?,
        };
        ctx.model = Some(model);
        if strategies.contains(&StrategySpec::Planned) {
            let scenario = match (self.scheme(), model.is_linear()) {
                (Scheme::Basic, false) => Scenario::BasicSublinear,
                (Scheme::Basic, true) => Scenario::BasicLinear,
                (Scheme::Accelerated, false) => Scenario::AccelSublinear,
                (Scheme::Accelerated, true) => Scenario::AccelLinear,
            };
            let args = PlanArgs {
                rho: self.rho,
                r0: self.r0,
                costs: self.costs.clone(),
                ..Default::default()
            };
            ctx.plan = Some(plan(&plan_request(
                &args,
                scenario,
                model,
                bench.problem.lipschitz(),
            )?)?);
        }
        Ok(ctx)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct SolveArgs {
    /// const:L, sip[:TOL], convergent[:DELTA] or planned.
    #[arg(long)]
    strategy: Option<String>,
    /// Stop after this many outer iterations as well.
    #[arg(long)]
    max_outer: Option<usize>,
    /// CSV destination (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    run: RunArgs,
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let r = &args.run;
    let preset = require(r.preset, "preset")?;
    let spec: StrategySpec = args.strategy.as_deref().unwrap_or("const:1").parse()?;
    let bench = presets::build(preset, &r.instance)?;
    let ctx = r.context(&bench, &[spec])?;
    let (mut source, cap) = make_source(spec, r.scheme(), &ctx)?;
    let mut stop = StopRule::budget(r.budget());
    if let Some(k) = args.max_outer.or(cap) {
        stop = stop.with_max_outer(k);
    }
    let trace = proxtrade::run(
        &bench.problem,
        bench.oracle.as_ref(),
        r.scheme(),
        source.as_mut(),
        &r.costs.model()?,
        &stop,
        &bench.x0,
    )?;
    let mut meta = r.meta(preset);
    meta.push(("scheme".into(), format!("{:?}", r.scheme()).to_lowercase()));
    meta.push(("budget".into(), format!("{:?}", r.budget())));
    meta.push(("strategy".into(), spec.to_string()));
    let csv = trace_to_csv(&trace, &meta);
    match &args.out {
        Some(path) => std::fs::write(path, csv).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

const DEFAULT_STRATEGIES: &str = "const:1,const:5,const:25,sip:1e-8,convergent:1";

fn parse_strategies(list: &str) -> Result<Vec<StrategySpec>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(CliError::from))
        .collect()
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct SweepArgs {
    /// Comma-separated strategy names.
    #[arg(long)]
    strategies: Option<String>,
    /// Directory for the trace and summary files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Outer steps of an accelerated reference run (0: none).
    #[arg(long)]
    reference_outer: Option<usize>,
    /// Inner iterations per step of the reference run.
    #[arg(long)]
    reference_inner: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    run: RunArgs,
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let r = &args.run;
    let preset = require(r.preset, "preset")?;
    let out_dir = require(args.out_dir.clone(), "out-dir")?;
    let strategies = parse_strategies(args.strategies.as_deref().unwrap_or(DEFAULT_STRATEGIES))?;
    let bench = presets::build(preset, &r.instance)?;
    let ctx = r.context(&bench, &strategies)?;
    let long_run = match args.reference_outer.unwrap_or(0) {
        0 => None,
        k => Some(
            reference_run(&bench, k, args.reference_inner.unwrap_or(200))?
                .trace
                .min_objective(),
        ),
    };
    let out = sweep(
        &bench,
        r.scheme(),
        &strategies,
        &ctx,
        &r.costs.model()?,
        r.budget(),
        &out_dir,
        &r.meta(preset),
        long_run,
    )?;
    summarize(&out, bench.problem.objective(&bench.x0)?);
    Ok(())
}

/// One line per strategy: steps, final gap and cost to the mid level.
fn summarize(out: &proxtrade::experiments::SweepOutput, f0: f64) {
    let f_ref = out.reference;
    let best = out
        .runs
        .iter()
        .map(|r| r.trace.min_objective() - f_ref)
        .filter(|g| *g > 0.0)
        .fold(f64::INFINITY, f64::min);
    let mid = if best.is_finite() {
        mid_gap(f0 - f_ref, best)
    } else {
        0.0
    };
    let mut err = std::io::stderr();
    let _ = writeln!(err, "reference optimum {f_ref:e}; mid gap {mid:e}");
    for r in &out.runs {
        let cost =
            cost_to_gap(&r.trace, f_ref, mid).map_or("never".to_string(), |c| format!("{c}"));
        let _ = writeln!(
            err,
            "{:>14}  steps {:>7}  final gap {:.3e}  cost to mid {cost}",
            r.strategy.to_string(),
            r.trace.len(),
            r.trace.min_objective() - f_ref
        );
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct BenchArgs {
    /// Comma-separated strategy names.
    #[arg(long)]
    strategies: Option<String>,
    /// Output directory; one subdirectory per scheme.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override both schemes' budgets.
    #[arg(long)]
    budget: Option<f64>,
    /// Outer steps of the reference run.
    #[arg(long)]
    reference_outer: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    costs: CostArgs,
}

fn cmd_bench(preset: Preset, args: BenchArgs) -> Result<(), CliError> {
    let out_root = args
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("results/{preset:?}").to_lowercase()));
    let strategies = parse_strategies(args.strategies.as_deref().unwrap_or(DEFAULT_STRATEGIES))?;
    let bench = presets::build(preset, &args.instance)?;
    let base = RunArgs {
        preset: Some(preset),
        budget: args.budget,
        instance: args.instance.clone(),
        model: args.model.clone(),
        costs: args.costs.clone(),
        ..Default::default()
    };
    let outer = args
        .reference_outer
        .unwrap_or(if args.instance.desk { 1000 } else { 3000 });
    let long_run = match outer {
        0 => None,
        k => Some(reference_run(&bench, k, 200)?.trace.min_objective()),
    };
    let f0 = bench.problem.objective(&bench.x0)?;
    for scheme in [SchemeArg::Basic, SchemeArg::Accelerated] {
        let r = RunArgs {
            scheme: Some(scheme),
            ..base.clone()
        };
        let ctx = r.context(&bench, &strategies)?;
        let dir = out_root.join(format!("{scheme:?}").to_lowercase());
        let _ = writeln!(std::io::stderr(), "== {scheme:?} -> {}", dir.display());
        let out = sweep(
            &bench,
            r.scheme(),
            &strategies,
            &ctx,
            &r.costs.model()?,
            r.budget(),
            &dir,
            &r.meta(preset),
            long_run,
        )?;
        summarize(&out, f0);
    }
    Ok(())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct CalibrateArgs {
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// sublinear[:ALPHA] or linear.
    #[arg(long)]
    family: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    instance: InstanceArgs,
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let preset = require(args.preset, "preset")?;
    let bench = presets::build(preset, &args.instance)?;
    let model = presets::calibrate(&bench, args.family.as_deref().unwrap_or("sublinear:1"))?;
    print_json(&model)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let file: Option<Value> = cli.config.as_deref().map(config::load).transpose()?;
    let f = file.as_ref();
    let path = cli.config.as_ref();
    match cli.command {
        Command::Plan(a) => cmd_plan(config::resolve(&a, f, "plan", path)?),
        Command::Solve(a) => cmd_solve(config::resolve(&a, f, "solve", path)?),
        Command::Sweep(a) => cmd_sweep(config::resolve(&a, f, "sweep", path)?),
        Command::BenchTv(a) => cmd_bench(Preset::Tv, config::resolve(&a, f, "bench-tv", path)?),
        Command::BenchGraph(a) => {
            cmd_bench(Preset::Graph, config::resolve(&a, f, "bench-graph", path)?)
        }
        Command::Calibrate(a) => cmd_calibrate(config::resolve(&a, f, "calibrate", path)?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::FAILURE
        }
    }
}
