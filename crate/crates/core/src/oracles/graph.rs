use super::{ProxOracle, ProxResult};
use crate::error::{check_dim, invalid, Result};
use crate::linalg::power_iteration;

/// Signed edge-incidence operator: `(Bx)_e = x_u - x_v` for edge `e = (u, v)`
/// with `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Incidence {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Incidence {
    /// Edges are reoriented so the smaller vertex index comes first.
    /// Self-loops are rejected.
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut oriented = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(invalid(format!(
                    "edge ({a}, {b}) out of range for {n_vertices} vertices"
                )));
            }
            if a == b {
                return Err(invalid(format!("self-loop at vertex {a}")));
            }
            oriented.push((a.min(b), a.max(b)));
        }
        Ok(Self {
            n_vertices,
            edges: oriented,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.edges.iter().map(|&(u, v)| x[u] - x[v]).collect()
    }

    pub fn apply_transpose(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices];
        for (&(u, v), &we) in self.edges.iter().zip(w) {
            out[u] += we;
            out[v] -= we;
        }
        out
    }

    /// `||B||_op^2` by 50 power iterations on `B^T B`.
    pub fn op_norm_sq(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        power_iteration(self.n_vertices, 50, |x| {
            self.apply_transpose(&self.apply(x))
        })
    }
}

/// Approximate prox of `lambda ||Bx||_1` after `l` dual projected-gradient
/// steps with step `1 / op_norm_sq`, returning the best primal iterate.
///
/// The dual variable `w` lives in `[-mu, mu]^m` with `mu = lambda / L`, and the
/// primal point is `z - B^T w`. `warm` and the returned dual are `w / mu`,
/// i.e. in `[-1, 1]^m`.
pub fn prox_graph_l1_dual(
    z: &[f64],
    lipschitz: f64,
    lambda: f64,
    incidence: &Incidence,
    op_norm_sq: f64,
    l: usize,
    warm: Option<&[f64]>,
) -> Result<ProxResult> {
    check_dim(incidence.n_vertices, z.len())?;
    if !(lipschitz > 0.0) {
        return Err(invalid(format!("L must be positive, got {lipschitz}")));
    }
    if !(lambda >= 0.0) {
        return Err(invalid(format!("lambda must be nonnegative, got {lambda}")));
    }
    let m = incidence.n_edges();
    let mu = lambda / lipschitz;
    if mu == 0.0 || m == 0 || op_norm_sq <= 0.0 {
        return Ok(ProxResult {
            point: z.to_vec(),
            inner_used: l,
            epsilon_bound: None,
            dual: Some(vec![0.0; m]),
        });
    }
    let mut w: Vec<f64> = match warm {
        Some(d) => {
            check_dim(m, d.len())?;
            d.iter().map(|v| (v * mu).clamp(-mu, mu)).collect()
        }
        None => vec![0.0; m],
    };
    let primal = |w: &[f64]| -> Vec<f64> {
        let bt = incidence.apply_transpose(w);
        z.iter().zip(&bt).map(|(a, b)| a - b).collect()
    };
    let step = 1.0 / op_norm_sq;
    let mut best = (f64::INFINITY, Vec::new(), Vec::new());
    for it in 0..=l {
        let x = primal(&w);
        let bx = incidence.apply(&x);
        let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
        let v = 0.5 * lipschitz * d2 + lambda * bx.iter().map(|e| e.abs()).sum::<f64>();
        if best.1.is_empty() || v < best.0 {
            best = (v, x, w.clone());
        }
        if it == l {
            break;
        }
        for (we, g) in w.iter_mut().zip(&bx) {
            *we = (*we + step * g).clamp(-mu, mu);
        }
    }
    let (_, point, w) = best;
    Ok(ProxResult {
        point,
        inner_used: l,
        epsilon_bound: None,
        dual: Some(w.into_iter().map(|v| v / mu).collect()),
    })
}

#[derive(Debug, Clone)]
pub struct GraphDualProx {
    lambda: f64,
    incidence: Incidence,
    op_norm_sq: f64,
}

impl GraphDualProx {
    pub fn new(lambda: f64, incidence: Incidence) -> Self {
        let op_norm_sq = incidence.op_norm_sq();
        Self {
            lambda,
            incidence,
            op_norm_sq,
        }
    }

    pub fn incidence(&self) -> &Incidence {
        &self.incidence
    }

    pub fn op_norm_sq(&self) -> f64 {
        self.op_norm_sq
    }
}

impl ProxOracle for GraphDualProx {
    fn nonsmooth(&self, x: &[f64]) -> f64 {
        self.lambda * self.incidence.apply(x).iter().map(|v| v.abs()).sum::<f64>()
    }

    fn nonsmooth_diff(&self, x: &[f64], y: &[f64]) -> f64 {
        let (bx, by) = (self.incidence.apply(x), self.incidence.apply(y));
        self.lambda
            * bx.iter()
                .zip(&by)
                .map(|(a, b)| a.abs() - b.abs())
                .sum::<f64>()
    }

    fn prox(
        &self,
        z: &[f64],
        lipschitz: f64,
        inner: usize,
        warm: Option<&[f64]>,
    ) -> Result<ProxResult> {
        prox_graph_l1_dual(
            z,
            lipschitz,
            self.lambda,
            &self.incidence,
            self.op_norm_sq,
            inner,
            warm,
        )
    }
}
