use crate::error::{invalid, Result};

/// Ranges at most this wide are scanned exhaustively.
const SCAN_WIDTH: usize = 64;
const GRID_POINTS: usize = 256;

/// Minimizes an objective over the integers in `[k_min, k_max]`.
///
/// The objective is assumed to decrease and then increase. Golden-section
/// search runs on its piecewise-linear extension in `ln k`, and the better of
/// the floor and ceiling of the continuous minimizer is returned. A grid of
/// log-spaced points guards the unimodality assumption: if any grid point
/// beats the golden-section answer, the whole range is scanned instead.
/// Non-finite objective values count as `+inf`.
pub fn minimize_over_k<F>(objective: F, k_min: usize, k_max: usize) -> Result<usize>
where
    F: Fn(usize) -> f64,
{
    if k_min == 0 || k_min > k_max {
        return Err(invalid(format!("empty search range [{k_min}, {k_max}]")));
    }
    let f = |k: usize| {
        let v = objective(k);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if k_max - k_min <= SCAN_WIDTH {
        return Ok(scan(&f, k_min, k_max));
    }

    let extended = |t: f64| {
        let lo = (t.floor() as usize).clamp(k_min, k_max);
        let hi = (t.ceil() as usize).clamp(k_min, k_max);
        let (a, b) = (f(lo), f(hi));
        if lo == hi || !a.is_finite() || !b.is_finite() {
            return a.max(b);
        }
        let w = t - lo as f64;
        (1.0 - w) * a + w * b
    };
    let g = |s: f64| extended(s.exp());
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = ((k_min as f64).ln(), (k_max as f64).ln());
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while (b.exp() - a.exp()) > 0.5 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    let t = (0.5 * (a + b)).exp();
    let mut best = t.floor().max(k_min as f64) as usize;
    let mut best_v = f(best.min(k_max));
    for cand in [t.floor() as usize, t.ceil() as usize, t.ceil() as usize + 1] {
        let cand = cand.clamp(k_min, k_max);
        let v = f(cand);
        if v < best_v || (v == best_v && cand < best) {
            best = cand;
            best_v = v;
        }
    }

    let ratio = (k_max as f64 / k_min as f64).powf(1.0 / (GRID_POINTS - 1) as f64);
    let mut probe = k_min as f64;
    for _ in 0..GRID_POINTS {
        let k = (probe.round() as usize).clamp(k_min, k_max);
        if f(k) < best_v {
            return Ok(scan(&f, k_min, k_max));
        }
        probe *= ratio;
    }
    Ok(best)
}

fn scan<F: Fn(usize) -> f64>(f: &F, k_min: usize, k_max: usize) -> usize {
    let mut best = k_min;
    let mut best_v = f(k_min);
    for k in k_min + 1..=k_max {
        let v = f(k);
        if v < best_v {
            best = k;
            best_v = v;
        }
    }
    best
}
