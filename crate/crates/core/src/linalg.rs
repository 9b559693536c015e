//! Small dense-vector helpers. Everything in the crate works on `&[f64]`.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn l1_norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Largest eigenvalue of a symmetric positive semi-definite operator, by
/// power iteration from a fixed deterministic start vector.
pub fn power_iteration<F>(dim: usize, iters: usize, mut apply: F) -> f64
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    if dim == 0 {
        return 0.0;
    }
    // Non-constant start so that operators annihilating constants still
    // get a component along their leading eigenvector.
    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).sin())
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    let mut estimate = 0.0;
    for _ in 0..iters {
        let w = apply(&v);
        let wn = norm(&w);
        if wn == 0.0 {
            return 0.0;
        }
        estimate = dot(&v, &w);
        v = w.into_iter().map(|x| x / wn).collect();
    }
    let w = apply(&v);
    estimate.max(dot(&v, &w))
}
