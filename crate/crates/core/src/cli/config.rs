use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_model::{LevyModel, ModelSpec};
use crate::mlmc::LevelSchedule;
use crate::payoffs::{Payoff, PayoffSpec};
use crate::scheme::{CoefficientField, CoefficientSpec};

/// One experiment, as read from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub coefficient: CoefficientSpec,
    pub y0: Vec<f64>,
    pub payoff: PayoffSpec,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    /// Samples per level for `levels`.
    #[serde(default = "default_n_probe")]
    pub n_probe: u64,
    /// Fine single-level reference, used when no closed form exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSpec>,
}

fn default_n_probe() -> u64 {
    1000
}

fn default_c() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// Explicit arrays; without `eps` and `h` the dyadic choice
    /// `ε_k = 2^{-k}`, `h_k = g⁻¹(2^k)` is used for `k = 1..=n.len()`.
    Manual {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<Vec<f64>>,
        n: Vec<u64>,
        #[serde(default = "default_true")]
        correction: bool,
    },
    Case1 {
        tau: f64,
        #[serde(rename = "C1", default = "default_c")]
        c1: f64,
        #[serde(rename = "C2", default = "default_c")]
        c2: f64,
        #[serde(default = "default_true")]
        correction: bool,
    },
    Case2 {
        tau: f64,
        #[serde(rename = "C1", default = "default_c")]
        c1: f64,
        #[serde(rename = "C2", default = "default_c")]
        c2: f64,
        #[serde(default = "default_true")]
        correction: bool,
    },
}

impl ScheduleSpec {
    /// Builds the schedule, replacing `τ` when `tau` is given.
    pub fn build(&self, model: &LevyModel, tau: Option<f64>) -> Result<LevelSchedule> {
        let (schedule, correction) = match self {
            ScheduleSpec::Manual { eps, h, n, correction } => {
                let s = match (eps, h) {
                    (Some(e), Some(h)) => LevelSchedule::manual(model, e.clone(), h.clone(), n.clone(), true)?,
                    (None, None) => LevelSchedule::dyadic(model, n.clone(), true)?,
                    _ => return Err(Error::Config("manual schedule needs both eps and h, or neither".into())),
                };
                (s, *correction)
            }
            ScheduleSpec::Case1 { tau: t, c1, c2, correction } => {
                (LevelSchedule::case1(model, tau.unwrap_or(*t), *c1, *c2)?, *correction)
            }
            ScheduleSpec::Case2 { tau: t, c1, c2, correction } => {
                (LevelSchedule::case2(model, tau.unwrap_or(*t), *c1, *c2)?, *correction)
            }
        };
        Ok(if correction { schedule } else { schedule.without_correction() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub tau_list: Vec<f64>,
    pub repetitions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    pub eps: f64,
    pub h: f64,
    pub n: u64,
}

/// Validated, ready-to-run form of a config.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: LevyModel,
    pub coeff: CoefficientField,
    pub payoff: Payoff,
}

impl Experiment {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::new(config)
    }

    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let model = LevyModel::try_from(config.model.clone())?;
        let coeff = CoefficientField::try_from(&config.coefficient)?;
        let payoff = Payoff::from(&config.payoff);
        if coeff.dim_x() != model.dim_x() {
            return Err(Error::DimensionMismatch {
                expected: model.dim_x(),
                found: coeff.dim_x(),
            });
        }
        if config.y0.len() != coeff.dim_y() {
            return Err(Error::DimensionMismatch {
                expected: coeff.dim_y(),
                found: config.y0.len(),
            });
        }
        payoff.check_dim(coeff.dim_y())?;
        Ok(Self {
            config,
            model,
            coeff,
            payoff,
        })
    }

    pub fn problem(&self) -> crate::mlmc::Problem<'_> {
        crate::mlmc::Problem::new(&self.model, &self.coeff, &self.config.y0, &self.payoff)
    }

    pub fn schedule(&self, tau: Option<f64>) -> Result<LevelSchedule> {
        self.config.schedule.build(&self.model, tau)
    }
}
