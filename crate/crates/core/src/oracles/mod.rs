//! Proximity-operator oracles.
//!
//! An oracle approximates `argmin_x (L/2)||x - z||^2 + h(x)` for one fixed
//! non-smooth term `h`. Iterative oracles run a caller-chosen number of inner
//! iterations; exact oracles ignore it. Any warm-start state is owned by the
//! caller and passed back in through `warm`.

mod calibrate;
mod graph;
mod l1;
mod synthetic;
mod tv;

use std::sync::Arc;

pub use calibrate::{calibrate_error_model, RateFamily, DEFAULT_CALIBRATION_COUNTS};
pub use graph::{prox_graph_l1_dual, GraphDualProx, Incidence};
pub use l1::{prox_l1_exact, soft_threshold, L1Prox, ZeroProx};
pub use synthetic::{prox_synthetic, SyntheticOracle};
pub use tv::{divergence, gradient, prox_tv_dual, total_variation, TvDualProx};

use crate::error::Result;
use crate::linalg::dist;

#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub point: Vec<f64>,
    pub inner_used: usize,
    /// Certified upper bound on the prox-objective gap, when known.
    pub epsilon_bound: Option<f64>,
    /// Dual iterate for warm-starting the next call (dual oracles only).
    pub dual: Option<Vec<f64>>,
}

impl ProxResult {
    pub(crate) fn exact(point: Vec<f64>) -> Self {
        Self {
            point,
            inner_used: 0,
            epsilon_bound: Some(0.0),
            dual: None,
        }
    }
}

pub trait ProxOracle: Send + Sync {
    /// The non-smooth term `h` this oracle is the proximity operator of.
    fn nonsmooth(&self, x: &[f64]) -> f64;

    /// `h(x) - h(y)`. Separable terms override this to difference term by
    /// term, which keeps tiny gaps accurate next to large `h` values.
    fn nonsmooth_diff(&self, x: &[f64], y: &[f64]) -> f64 {
        self.nonsmooth(x) - self.nonsmooth(y)
    }

    fn prox(
        &self,
        z: &[f64],
        lipschitz: f64,
        inner: usize,
        warm: Option<&[f64]>,
    ) -> Result<ProxResult>;
}

impl<T: ProxOracle + ?Sized> ProxOracle for Arc<T> {
    fn nonsmooth(&self, x: &[f64]) -> f64 {
        (**self).nonsmooth(x)
    }

    fn nonsmooth_diff(&self, x: &[f64], y: &[f64]) -> f64 {
        (**self).nonsmooth_diff(x, y)
    }

    fn prox(
        &self,
        z: &[f64],
        lipschitz: f64,
        inner: usize,
        warm: Option<&[f64]>,
    ) -> Result<ProxResult> {
        (**self).prox(z, lipschitz, inner, warm)
    }
}

/// `(L/2)||x - z||^2 + h(x)`
pub fn prox_objective(oracle: &dyn ProxOracle, z: &[f64], lipschitz: f64, x: &[f64]) -> f64 {
    let d = dist(x, z);
    0.5 * lipschitz * d * d + oracle.nonsmooth(x)
}

/// Runs an iterative oracle for a fixed, large number of iterations and
/// presents the result as if it were exact. Used as a reference solution
/// where no closed-form prox exists.
pub struct LongRun<O> {
    inner: O,
    iterations: usize,
}

impl<O: ProxOracle> LongRun<O> {
    pub fn new(inner: O, iterations: usize) -> Self {
        Self { inner, iterations }
    }
}

impl<O: ProxOracle> ProxOracle for LongRun<O> {
    fn nonsmooth(&self, x: &[f64]) -> f64 {
        self.inner.nonsmooth(x)
    }

    fn nonsmooth_diff(&self, x: &[f64], y: &[f64]) -> f64 {
        self.inner.nonsmooth_diff(x, y)
    }

    fn prox(
        &self,
        z: &[f64],
        lipschitz: f64,
        _inner: usize,
        warm: Option<&[f64]>,
    ) -> Result<ProxResult> {
        let mut r = self.inner.prox(z, lipschitz, self.iterations, warm)?;
        r.inner_used = 0;
        r.epsilon_bound = None;
        Ok(r)
    }
}
