//! Invariant checks shared by the property suite and the acceptance run.
//! Each returns `Err` with a description on the first violation.

#![allow(dead_code)]

use std::sync::Arc;

use proxtrade::bounds::{parametric_bound, rate_bound, BoundParams};
use proxtrade::experiments::tv::Blur;
use proxtrade::experiments::{build_graph_problem, desk_lasso, GraphInstance};
use proxtrade::linalg::dot;
use proxtrade::oracles::{
    divergence, gradient, prox_l1_exact, prox_objective, prox_synthetic, GraphDualProx, Incidence,
    L1Prox, LongRun, TvDualProx,
};
use proxtrade::planner::{d_of_k, n_of_k, plan};
use proxtrade::strategies::{constant_source, sip_source};
use proxtrade::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Check {
    if (a - b).abs() <= tol {
        Ok(())
    } else {
        Err(format!(
            "{what}: {a} vs {b} (|diff| = {:e} > {tol:e})",
            (a - b).abs()
        ))
    }
}

// ---------------------------------------------------------------- operators

pub fn grad_div_adjoint(n: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let x = random_vec(&mut r, n * n, 1.0);
    let p = random_vec(&mut r, 2 * n * n, 1.0);
    let lhs = dot(&gradient(&x, n), &p);
    let rhs = -dot(&x, &divergence(&p, n));
    close(lhs, rhs, 1e-10, "<grad x, p> vs -<x, div p>")
}

pub fn incidence_adjoint(vertices: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..vertices {
        for v in u + 1..vertices {
            if r.random_bool(0.3) {
                edges.push(if r.random_bool(0.5) { (u, v) } else { (v, u) });
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, vertices - 1));
    }
    let b = Incidence::new(vertices, &edges).map_err(|e| e.to_string())?;
    let x = random_vec(&mut r, vertices, 1.0);
    let w = random_vec(&mut r, b.n_edges(), 1.0);
    close(
        dot(&b.apply(&x), &w),
        dot(&x, &b.apply_transpose(&w)),
        1e-10,
        "<Bx, w> vs <x, B^T w>",
    )?;
    let ones = vec![1.0; vertices];
    if b.apply(&ones).iter().any(|v| *v != 0.0) {
        return Err("incidence does not annihilate constants".into());
    }
    Ok(())
}

pub fn blur_symmetric(n: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let blur = Blur::new(n, 9, 4.0).map_err(|e| e.to_string())?;
    let x = random_vec(&mut r, n * n, 1.0);
    let y = random_vec(&mut r, n * n, 1.0);
    close(
        dot(&blur.apply(&x), &y),
        dot(&x, &blur.apply(&y)),
        1e-10,
        "<Ax, y> vs <x, Ay>",
    )
}

// -------------------------------------------------------------------- oracles

/// `0` lies in `L (x - z) + lambda d|x|` coordinatewise.
pub fn l1_prox_optimality(z: &[f64], lipschitz: f64, lambda: f64) -> Check {
    let x = prox_l1_exact(z, lipschitz, lambda)
        .map_err(|e| e.to_string())?
        .point;
    for (i, (xi, zi)) in x.iter().zip(z).enumerate() {
        let g = lipschitz * (xi - zi);
        let tol = 1e-12 * (1.0 + lipschitz * zi.abs() + lambda);
        let ok = if *xi > 0.0 {
            (g + lambda).abs() <= tol
        } else if *xi < 0.0 {
            (g - lambda).abs() <= tol
        } else {
            g.abs() <= lambda + tol
        };
        if !ok {
            return Err(format!(
                "coordinate {i}: x={xi}, z={zi}, L={lipschitz}, lambda={lambda}"
            ));
        }
    }
    Ok(())
}

/// The synthetic oracle's point has prox gap equal to the requested error.
/// The gap is measured as a sum of small differences so that rounding in the
/// two prox objectives does not swamp it.
pub fn synthetic_gap_exact(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.random_range(1..12);
    let z = random_vec(&mut r, n, 3.0);
    let lip = r.random_range(0.1..10.0);
    let lambda = r.random_range(0.0..2.0);
    let target = 10f64.powf(r.random_range(-8.0..0.0));
    let exact = L1Prox { lambda };
    let p = prox_l1_exact(&z, lip, lambda)
        .map_err(|e| e.to_string())?
        .point;
    let x = prox_synthetic(&z, lip, &exact, target)
        .map_err(|e| e.to_string())?
        .point;
    let mut gap = 0.0;
    for i in 0..n {
        // |x-z|^2 - |p-z|^2 = (x-p)(x+p-2z)
        gap += 0.5 * lip * (x[i] - p[i]) * (x[i] + p[i] - 2.0 * z[i]);
        gap += lambda * (x[i].abs() - p[i].abs());
    }
    close(gap, target, 1e-10 * target, "synthetic prox gap")
}

fn small_tv_probe(seed: u64) -> (Vec<f64>, usize) {
    let mut r = rng(seed);
    let n = 6;
    let mut z = random_vec(&mut r, n * n, 0.2);
    // Piecewise structure so that the TV prox is not trivial.
    for (k, v) in z.iter_mut().enumerate() {
        if k % n >= n / 2 {
            *v += 1.0;
        }
    }
    (z, n)
}

fn small_graph_oracle(seed: u64) -> GraphDualProx {
    let inst = GraphInstance {
        d: 12,
        within_prob: 0.5,
        cross_pairs: 2,
        s: 4,
        lambda: 0.05,
        seed,
    };
    let g = build_graph_problem(&inst).expect("small graph builds");
    g.oracle
}

/// Prox gap of the dual oracles against a long-run reference at
/// `l = 1, 2, 4, ..., 256`; returns the gaps.
pub fn oracle_gaps(oracle: &dyn ProxOracle, z: &[f64], lipschitz: f64) -> Result<Vec<f64>, String> {
    let reference = LongRun::new(ProxRef(oracle), 100_000);
    let p = reference
        .prox(z, lipschitz, 0, None)
        .map_err(|e| e.to_string())?
        .point;
    let best = prox_objective(oracle, z, lipschitz, &p);
    (0..=8)
        .map(|j| {
            let x = oracle
                .prox(z, lipschitz, 1 << j, None)
                .map_err(|e| e.to_string())?
                .point;
            Ok(prox_objective(oracle, z, lipschitz, &x) - best)
        })
        .collect()
}

struct ProxRef<'a>(&'a dyn ProxOracle);

impl ProxOracle for ProxRef<'_> {
    fn nonsmooth(&self, x: &[f64]) -> f64 {
        self.0.nonsmooth(x)
    }
    fn prox(&self, z: &[f64], l: f64, inner: usize, warm: Option<&[f64]>) -> Result<ProxResult> {
        self.0.prox(z, l, inner, warm)
    }
}

fn non_increasing(gaps: &[f64], what: &str) -> Check {
    let scale = gaps.first().copied().unwrap_or(0.0).abs().max(1e-300);
    for (j, w) in gaps.windows(2).enumerate() {
        if w[1] > w[0] + 1e-12 * scale {
            return Err(format!(
                "{what}: gap rises from {:e} to {:e} at l = {}",
                w[0],
                w[1],
                2 << j
            ));
        }
    }
    Ok(())
}

pub fn tv_gap_monotone(seed: u64, lambda: f64) -> Check {
    let (z, _) = small_tv_probe(seed);
    let gaps = oracle_gaps(&TvDualProx { lambda }, &z, 2.0)?;
    non_increasing(&gaps, "TV dual oracle")
}

pub fn graph_gap_monotone(seed: u64) -> Check {
    let oracle = small_graph_oracle(seed);
    let mut r = rng(seed.wrapping_add(1));
    let z = random_vec(&mut r, 12, 1.0);
    let gaps = oracle_gaps(&oracle, &z, 2.0)?;
    non_increasing(&gaps, "graph dual oracle")
}

/// Re-entering a dual oracle with its own dual and zero extra iterations
/// reproduces the same primal point.
pub fn warm_start_idempotent(seed: u64, l: usize) -> Check {
    let (z, _) = small_tv_probe(seed);
    let tv = TvDualProx { lambda: 0.3 };
    let first = tv.prox(&z, 2.0, l, None).map_err(|e| e.to_string())?;
    let again = tv
        .prox(&z, 2.0, 0, first.dual.as_deref())
        .map_err(|e| e.to_string())?;
    for (a, b) in first.point.iter().zip(&again.point) {
        close(*a, *b, 1e-12, "TV warm restart")?;
    }
    let g = small_graph_oracle(seed);
    let mut r = rng(seed.wrapping_add(7));
    let zg = random_vec(&mut r, 12, 1.0);
    let first = g.prox(&zg, 2.0, l, None).map_err(|e| e.to_string())?;
    let again = g
        .prox(&zg, 2.0, 0, first.dual.as_deref())
        .map_err(|e| e.to_string())?;
    for (a, b) in first.point.iter().zip(&again.point) {
        close(*a, *b, 1e-12, "graph warm restart")?;
    }
    Ok(())
}

// ----------------------------------------------------------- core arithmetic

pub fn schedule_cost_additive(a: &[usize], b: &[usize], c_in: f64, c_out: f64) -> Check {
    let costs = CostModel::new(c_in, c_out).map_err(|e| e.to_string())?;
    let sa = Schedule::new(a.to_vec()).map_err(|e| e.to_string())?;
    let sb = Schedule::new(b.to_vec()).map_err(|e| e.to_string())?;
    let whole = schedule_cost(&sa.concat(&sb), &costs);
    let parts = schedule_cost(&sa, &costs) + schedule_cost(&sb, &costs);
    close(
        whole,
        parts,
        1e-9 * whole.abs().max(1.0),
        "cost of concatenation",
    )?;
    let direct =
        c_in * a.iter().chain(b).sum::<usize>() as f64 + c_out * (a.len() + b.len()) as f64;
    close(whole, direct, 1e-9 * whole.abs().max(1.0), "cost formula")
}

pub fn epsilon_roundtrip(model: &ErrorModel, l: usize) -> Check {
    let e = epsilon_of_l(model, l).map_err(|e| e.to_string())?;
    let e_next = epsilon_of_l(model, l + 1).map_err(|e| e.to_string())?;
    if e_next.is_nan() || e_next >= e {
        return Err(format!(
            "epsilon not decreasing at l={l}: {e} then {e_next}"
        ));
    }
    let back = l_of_epsilon(model, e);
    if back != l {
        return Err(format!("l_of_epsilon(epsilon_of_l({l})) = {back}"));
    }
    Ok(())
}

/// The problem's objective against `g + h` computed here from scratch.
pub fn objective_matches(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.random_range(1..10);
    let a = random_vec(&mut r, n, 2.0);
    let lambda = r.random_range(0.0..1.0);
    let a2 = a.clone();
    let a3 = a.clone();
    let p = CompositeProblem::new(
        n,
        1.0,
        Arc::new(move |x: &[f64]| {
            0.5 * x.iter().zip(&a2).map(|(u, v)| (u - v).powi(2)).sum::<f64>()
        }),
        Arc::new(move |x: &[f64]| x.iter().zip(&a3).map(|(u, v)| u - v).collect()),
        Arc::new(move |x: &[f64]| lambda * x.iter().map(|v| v.abs()).sum::<f64>()),
    )
    .map_err(|e| e.to_string())?;
    for _ in 0..100 {
        let x = random_vec(&mut r, n, 5.0);
        let mut g = 0.0;
        let mut h = 0.0;
        for i in 0..n {
            g += 0.5 * (x[i] - a[i]) * (x[i] - a[i]);
            h += lambda * x[i].abs();
        }
        let got = evaluate_objective(&p, &x).map_err(|e| e.to_string())?;
        close(got, g + h, 1e-12 * (g + h).abs().max(1e-300), "objective")?;
    }
    Ok(())
}

// --------------------------------------------------------------------- bounds

pub fn scenario_model(scenario: Scenario, a: f64, rate: f64) -> ErrorModel {
    if scenario.is_linear() {
        ErrorModel::linear(a, rate).unwrap()
    } else {
        ErrorModel::sublinear(a, rate).unwrap()
    }
}

/// Raising any single `l_i` never raises the parametric bound.
pub fn bound_monotone(
    scenario: Scenario,
    params: &BoundParams,
    l: &[usize],
    i: usize,
    bump: usize,
) -> Check {
    let k = l.len();
    let base = parametric_bound(scenario, k, &Schedule::new(l.to_vec()).unwrap(), params)
        .map_err(|e| e.to_string())?;
    let mut more = l.to_vec();
    more[i] += bump;
    let after = parametric_bound(scenario, k, &Schedule::new(more).unwrap(), params)
        .map_err(|e| e.to_string())?;
    if after > base * (1.0 + 1e-14) {
        return Err(format!(
            "bound rose from {base} to {after} when l_{} grew",
            i + 1
        ));
    }
    Ok(())
}

/// The single-factor parametric bound dominates the runtime bound at the
/// model's errors.
pub fn bound_dominates_rate(scenario: Scenario, params: &BoundParams, l: &[usize]) -> Check {
    let k = l.len();
    let b = parametric_bound(scenario, k, &Schedule::new(l.to_vec()).unwrap(), params)
        .map_err(|e| e.to_string())?;
    let eps: Vec<f64> = l
        .iter()
        .map(|&v| epsilon_of_l(&params.model, v).unwrap())
        .collect();
    let r = rate_bound(scenario.is_accelerated(), &eps, params.lipschitz, params.r0)
        .map_err(|e| e.to_string())?;
    if r > b * (1.0 + 1e-12) {
        return Err(format!("runtime bound {r} exceeds parametric bound {b}"));
    }
    Ok(())
}

// -------------------------------------------------------------------- planner

/// Feasibility of the returned plan, the shape of the relaxed schedule and,
/// for the accelerated/linear scenario, the KKT residuals.
pub fn plan_invariants(req: &PlanRequest) -> Check {
    let p = match plan(req) {
        Ok(p) => p,
        Err(Error::Infeasible { .. }) => return Ok(()),
        Err(e) => return Err(e.to_string()),
    };
    let b = parametric_bound(req.scenario, p.k_star, &p.schedule, &req.params)
        .map_err(|e| e.to_string())?;
    if b > req.rho {
        return Err(format!("plan bound {b} exceeds rho {}", req.rho));
    }
    if p.case == PlanCase::Unconstrained {
        return Ok(());
    }
    let l = &p.relaxed;
    if req.scenario != Scenario::AccelLinear {
        if l.iter().any(|v| (v - l[0]).abs() > 1e-12 * l[0]) {
            return Err("relaxed schedule not constant".into());
        }
        return Ok(());
    }
    let ErrorModel::Linear { gamma, .. } = req.params.model else {
        return Err("model mismatch".into());
    };
    let k = p.k_star;
    let d = d_of_k(k as f64, req);
    let s = (1.0 - gamma).sqrt();
    if d >= 0.5 * (k * (k + 1)) as f64 * s {
        // Every l_i = 1 meets the bound.
        return if l.iter().all(|&v| v == 1.0) {
            Ok(())
        } else {
            Err("expected all ones".into())
        };
    }
    let n = n_of_k(k, d, gamma).map_err(|e| e.to_string())?;
    if l[..n - 1].iter().any(|&v| v != 1.0) {
        return Err(format!("entries before n = {n} are not 1"));
    }
    if l[n - 1..].windows(2).any(|w| w[1] < w[0]) {
        return Err("entries after n decrease".into());
    }
    // Recover the multiplier from a free coordinate and check the KKT system.
    let ln_s = s.ln();
    let i_free = k;
    let lam = -1.0 / (i_free as f64 * s.powf(l[i_free - 1]) * ln_s);
    for (idx, &li) in l.iter().enumerate() {
        let i = (idx + 1) as f64;
        let mu = 1.0 + lam * i * s.powf(li) * ln_s;
        if idx + 1 >= n {
            if mu.abs() > 1e-8 {
                return Err(format!("stationarity residual {mu:e} at i = {}", idx + 1));
            }
        } else if mu < -1e-8 || (mu * (1.0 - li)).abs() > 1e-8 {
            return Err(format!(
                "multiplier {mu:e} invalid at bound index {}",
                idx + 1
            ));
        }
    }
    Ok(())
}

// -------------------------------------------------------------------- solvers

/// Cost accounting, realized schedule and descent on the lasso instance with
/// exact prox.
pub fn solver_accounting(l: usize, c_in: f64, c_out: f64, k: usize) -> Check {
    let bench = desk_lasso(3).map_err(|e| e.to_string())?;
    let costs = CostModel::new(c_in, c_out).map_err(|e| e.to_string())?;
    let mut src = constant_source(l).map_err(|e| e.to_string())?;
    let t = run(
        &bench.problem,
        bench.oracle.as_ref(),
        Scheme::Basic,
        &mut src,
        &costs,
        &StopRule::max_outer(k),
        &bench.x0,
    )
    .map_err(|e| e.to_string())?;
    let sched = t.realized_schedule().ok_or("empty trace")?;
    if sched.inner_counts().iter().any(|&v| v != l) {
        return Err("realized schedule is not constant".into());
    }
    let expected = k as f64 * (c_in * l as f64 + c_out);
    let from_schedule = schedule_cost(&sched, &costs);
    close(
        t.final_cost(),
        from_schedule,
        1e-12 * from_schedule,
        "trace cost vs schedule cost",
    )?;
    close(
        t.final_cost(),
        expected,
        1e-9 * expected,
        "k (c_in l + c_out)",
    )?;
    for w in t.records.windows(2) {
        if w[1].objective > w[0].objective {
            return Err(format!(
                "basic exact objective rose at k = {}",
                w[1].outer_index
            ));
        }
    }
    Ok(())
}

/// SIP never lowers its inner count.
pub fn sip_non_decreasing(tol: f64, budget: f64, accelerated: bool) -> Check {
    let bench = desk_lasso(4).map_err(|e| e.to_string())?;
    let synthetic = proxtrade::oracles::SyntheticOracle::new(
        L1Prox {
            lambda: proxtrade::experiments::lasso::LASSO_LAMBDA,
        },
        ErrorModel::sublinear(1e-2, 1.0).unwrap(),
    );
    let mut src = sip_source(tol).map_err(|e| e.to_string())?;
    let scheme = if accelerated {
        Scheme::Accelerated
    } else {
        Scheme::Basic
    };
    let t = run(
        &bench.problem,
        &synthetic,
        scheme,
        &mut src,
        &CostModel::unit(),
        &StopRule::budget(budget),
        &bench.x0,
    )
    .map_err(|e| e.to_string())?;
    let l: Vec<usize> = t.records.iter().map(|r| r.inner_used).collect();
    if l.windows(2).any(|w| w[1] < w[0]) {
        return Err("SIP inner count decreased".into());
    }
    Ok(())
}
