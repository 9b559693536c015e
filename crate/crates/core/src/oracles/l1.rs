use super::{ProxOracle, ProxResult};
use crate::error::{invalid, Result};
use crate::linalg::l1_norm;

pub fn soft_threshold(v: f64, level: f64) -> f64 {
    if v > level {
        v - level
    } else if v < -level {
        v + level
    } else {
        0.0
    }
}

/// Exact prox of `lambda * ||x||_1`: componentwise soft-threshold at `lambda / L`.
pub fn prox_l1_exact(z: &[f64], lipschitz: f64, lambda: f64) -> Result<ProxResult> {
    if !(lipschitz > 0.0) {
        return Err(invalid(format!("L must be positive, got {lipschitz}")));
    }
    if !(lambda >= 0.0) {
        return Err(invalid(format!("lambda must be nonnegative, got {lambda}")));
    }
    let level = lambda / lipschitz;
    Ok(ProxResult::exact(
        z.iter().map(|&v| soft_threshold(v, level)).collect(),
    ))
}

#[derive(Debug, Clone, Copy)]
pub struct L1Prox {
    pub lambda: f64,
}

impl ProxOracle for L1Prox {
    fn nonsmooth(&self, x: &[f64]) -> f64 {
        self.lambda * l1_norm(x)
    }

    fn nonsmooth_diff(&self, x: &[f64], y: &[f64]) -> f64 {
        self.lambda * x.iter().zip(y).map(|(a, b)| a.abs() - b.abs()).sum::<f64>()
    }

    fn prox(&self, z: &[f64], lipschitz: f64, _: usize, _: Option<&[f64]>) -> Result<ProxResult> {
        prox_l1_exact(z, lipschitz, self.lambda)
    }
}

/// `h = 0`; the prox is the identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroProx;

impl ProxOracle for ZeroProx {
    fn nonsmooth(&self, _: &[f64]) -> f64 {
        0.0
    }

    fn prox(&self, z: &[f64], _: f64, _: usize, _: Option<&[f64]>) -> Result<ProxResult> {
        Ok(ProxResult::exact(z.to_vec()))
    }
}
