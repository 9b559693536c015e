//! Inner-count sources: constant, planned, convergent-rate and SIP.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::problem::{l_of_epsilon, ErrorModel, Plan};
use crate::solvers::{InnerCountSource, Scheme};

/// The same `l` at every outer step.
#[derive(Debug, Clone, Copy)]
pub struct ConstantSource {
    l: usize,
}

pub fn constant_source(l: usize) -> Result<ConstantSource> {
    if l < 1 {
        return Err(invalid("constant inner count must be at least 1"));
    }
    Ok(ConstantSource { l })
}

impl InnerCountSource for ConstantSource {
    fn next_l(&mut self, _: usize) -> Result<usize> {
        Ok(self.l)
    }
}

/// Replays a planner schedule; asking beyond `k*` is an error.
#[derive(Debug, Clone)]
pub struct PlannedSource {
    schedule: Vec<usize>,
}

pub fn planned_source(plan: &Plan) -> PlannedSource {
    PlannedSource {
        schedule: plan.schedule.inner_counts().to_vec(),
    }
}

impl InnerCountSource for PlannedSource {
    fn next_l(&mut self, k: usize) -> Result<usize> {
        match k.checked_sub(1).and_then(|i| self.schedule.get(i)) {
            Some(&l) => Ok(l),
            None => Err(Error::PlanExhausted {
                requested: k,
                planned: self.schedule.len(),
            }),
        }
    }
}

/// Targets `eps_k = scale / k^(2 + delta)` (basic) or `scale / k^(4 + delta)`
/// (accelerated), the decay that keeps the optimal outer rate.
#[derive(Debug, Clone, Copy)]
pub struct ConvergentSource {
    model: ErrorModel,
    exponent: f64,
    scale: f64,
}

pub fn convergent_source(
    scheme: Scheme,
    model: ErrorModel,
    delta: f64,
    scale: f64,
) -> Result<ConvergentSource> {
    if !(delta > 0.0) || !(scale > 0.0) {
        return Err(invalid(format!(
            "delta and scale must be positive, got delta={delta}, scale={scale}"
        )));
    }
    let base = match scheme {
        Scheme::Basic => 2.0,
        Scheme::Accelerated => 4.0,
    };
    Ok(ConvergentSource {
        model,
        exponent: base + delta,
        scale,
    })
}

impl ConvergentSource {
    pub fn target_epsilon(&self, k: usize) -> f64 {
        self.scale / (k as f64).powf(self.exponent)
    }
}

impl InnerCountSource for ConvergentSource {
    fn next_l(&mut self, k: usize) -> Result<usize> {
        Ok(l_of_epsilon(&self.model, self.target_epsilon(k)))
    }
}

/// Speedy inexact proximal-gradient controller: start at one inner iteration
/// and add one whenever the relative decrease of the objective stalls below
/// `tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SipState {
    pub current_l: usize,
    pub tol: f64,
}

pub fn sip_source(tol: f64) -> Result<SipState> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(invalid(format!(
            "SIP tolerance must be positive, got {tol}"
        )));
    }
    Ok(SipState { current_l: 1, tol })
}

impl InnerCountSource for SipState {
    fn next_l(&mut self, _: usize) -> Result<usize> {
        Ok(self.current_l)
    }

    fn observe(&mut self, _: usize, f_before: f64, f_after: f64) {
        let threshold = if f_before > 0.0 {
            self.tol * f_before
        } else {
            self.tol * f_before.abs() + 1e-30
        };
        if f_before - f_after < threshold {
            self.current_l += 1;
        }
    }
}

/// Textual strategy names used on the command line and in sweeps:
/// `const:5`, `sip:1e-8`, `convergent:1` (delta), `planned`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StrategySpec {
    Constant(usize),
    Sip(f64),
    Convergent(f64),
    Planned,
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(l) => write!(f, "const:{l}"),
            Self::Sip(t) => write!(f, "sip:{t:e}"),
            Self::Convergent(d) => write!(f, "convergent:{d}"),
            Self::Planned => write!(f, "planned"),
        }
    }
}

impl FromStr for StrategySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let bad = || invalid(format!("cannot parse strategy '{s}'"));
        match (name, arg) {
            ("const" | "constant", Some(a)) => {
                let l: usize = a.parse().map_err(|_| bad())?;
                if l < 1 {
                    return Err(bad());
                }
                Ok(Self::Constant(l))
            }
            ("sip", a) => {
                let t: f64 = a.unwrap_or("1e-8").parse().map_err(|_| bad())?;
                if !(t > 0.0) {
                    return Err(bad());
                }
                Ok(Self::Sip(t))
            }
            ("convergent", a) => {
                let d: f64 = a.unwrap_or("1").parse().map_err(|_| bad())?;
                if !(d > 0.0) {
                    return Err(bad());
                }
                Ok(Self::Convergent(d))
            }
            ("planned", None) => Ok(Self::Planned),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for StrategySpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StrategySpec> for String {
    fn from(s: StrategySpec) -> Self {
        s.to_string()
    }
}
