use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use proxtrade::experiments::{
    build_graph_problem, build_tv_problem, calibrate_benchmark, desk_lasso, read_pgm, Benchmark,
    GraphInstance, TvInstance,
};
use proxtrade::oracles::RateFamily;
use proxtrade::{ErrorModel, Scheme};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Deblurring with total-variation regularization.
    Tv,
    /// Two-cluster semi-supervised labeling.
    Graph,
    /// Small lasso with an exact prox.
    Lasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Basic,
    Accelerated,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Basic => Scheme::Basic,
            SchemeArg::Accelerated => Scheme::Accelerated,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct InstanceArgs {
    /// Scaled-down sizes and budgets.
    #[arg(long)]
    pub desk: bool,
    /// Seed for noise, graph and labels.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Binary PGM to blur and restore instead of the synthetic image.
    #[arg(long)]
    pub image: Option<PathBuf>,
}

impl InstanceArgs {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }
}

pub fn build(preset: Preset, inst: &InstanceArgs) -> Result<Benchmark, CliError> {
    let seed = inst.seed();
    if inst.image.is_some() && preset != Preset::Tv {
        return Err(CliError::Usage(
            "--image only applies to the tv preset".into(),
        ));
    }
    Ok(match preset {
        Preset::Tv => {
            let mut tv = if inst.desk {
                TvInstance::desk(seed)
            } else {
                TvInstance::full(seed)
            };
            let source = match &inst.image {
                Some(path) => {
                    let img = read_pgm(path)?;
                    if img.width != img.height {
                        return Err(CliError::Usage(format!(
                            "{}: image must be square, got {}x{}",
                            path.display(),
                            img.width,
                            img.height
                        )));
                    }
                    tv.image_side = img.width;
                    Some(img.pixels)
                }
                None => None,
            };
            build_tv_problem(&tv, source.as_deref())?.into_benchmark("tv", seed)
        }
        Preset::Graph => {
            build_graph_problem(&GraphInstance::reference(seed))?.into_benchmark("graph", seed)
        }
        Preset::Lasso => desk_lasso(seed)?,
    })
}

/// `sublinear:ALPHA` or `linear`.
pub fn parse_family(s: &str) -> Result<RateFamily, CliError> {
    match s.split_once(':') {
        None if s == "linear" => Ok(RateFamily::Linear),
        None if s == "sublinear" => Ok(RateFamily::Sublinear { alpha: 1.0 }),
        Some(("sublinear", a)) => a
            .parse::<f64>()
            .ok()
            .filter(|a| *a > 0.0)
            .map(|alpha| RateFamily::Sublinear { alpha })
            .ok_or_else(|| CliError::Usage(format!("bad rate exponent in '{s}'"))),
        _ => Err(CliError::Usage(format!(
            "unknown rate family '{s}' (expected sublinear[:ALPHA] or linear)"
        ))),
    }
}

/// Inner counts used when calibrating from the command line.
pub const CALIBRATION_COUNTS: [usize; 8] = [1, 2, 4, 8, 16, 32, 64, 128];

pub fn calibrate(bench: &Benchmark, family: &str) -> Result<ErrorModel, CliError> {
    Ok(calibrate_benchmark(
        bench,
        parse_family(family)?,
        &CALIBRATION_COUNTS,
    )?)
}
