use serde::{Deserialize, Serialize};

use super::{FormatError, SCHEMA_VERSION};
use crate::corpus::draw_offsets;
use crate::dynamics::LambdaMode;
use crate::scheduler::{
    ConfigError, ScenarioConfig, StalenessModel, TimingModel, DEFAULT_STOP_TOLERANCE,
};

/// A scenario as stored on disk. The seed may be left out and supplied at
/// run time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub timing: TimingRecord,
    pub staleness: String,
    pub lambda: f64,
    #[serde(default = "strict")]
    pub lambda_mode: String,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub initial_prices: Vec<f64>,
    /// Absent means the default; `null` runs to the horizon.
    #[serde(default = "default_stop")]
    pub stop_tolerance: Option<f64>,
}

fn strict() -> String {
    LambdaMode::Strict.as_str().to_string()
}

fn default_stop() -> Option<f64> {
    Some(DEFAULT_STOP_TOLERANCE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimingRecord {
    /// Without `offsets`, phases are drawn from the seed.
    RoundRobin {
        period: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offsets: Option<Vec<f64>>,
    },
    PoissonClipped {
        rates: Vec<f64>,
    },
    JitteredFixed {
        period: f64,
        jitter: f64,
    },
    Scripted {
        events: Vec<(f64, usize)>,
    },
}

impl TimingRecord {
    fn needs_seed(&self) -> bool {
        match self {
            TimingRecord::RoundRobin { offsets, .. } => offsets.is_none(),
            TimingRecord::PoissonClipped { .. } | TimingRecord::JitteredFixed { .. } => true,
            TimingRecord::Scripted { .. } => false,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            TimingRecord::RoundRobin { .. } => "round_robin",
            TimingRecord::PoissonClipped { .. } => "poisson_clipped",
            TimingRecord::JitteredFixed { .. } => "jittered_fixed",
            TimingRecord::Scripted { .. } => "scripted",
        }
    }
}

impl From<&TimingModel> for TimingRecord {
    fn from(t: &TimingModel) -> Self {
        match t {
            TimingModel::RoundRobin { period, offsets } => TimingRecord::RoundRobin {
                period: *period,
                offsets: Some(offsets.clone()),
            },
            TimingModel::PoissonClipped { rates } => TimingRecord::PoissonClipped {
                rates: rates.clone(),
            },
            TimingModel::JitteredFixed { period, jitter } => TimingRecord::JitteredFixed {
                period: *period,
                jitter: *jitter,
            },
            TimingModel::Scripted { events } => TimingRecord::Scripted {
                events: events.clone(),
            },
        }
    }
}

fn field(path: &str, message: impl Into<String>) -> FormatError {
    FormatError::Field {
        path: path.into(),
        message: message.into(),
    }
}

impl ScenarioFile {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            timing: (&config.timing).into(),
            staleness: config.staleness.name().to_string(),
            lambda: config.lambda,
            lambda_mode: config.lambda_mode.as_str().to_string(),
            horizon: config.horizon,
            seed: config.seed,
            initial_prices: config.initial_prices.clone(),
            stop_tolerance: config.stop_tolerance,
        }
    }

    /// Whether running this scenario draws random numbers.
    pub fn is_stochastic(&self) -> bool {
        self.timing.needs_seed()
            || StalenessModel::from_name(&self.staleness).is_some_and(StalenessModel::is_stochastic)
    }

    /// Builds a validated configuration; `seed` overrides the file's seed.
    pub fn to_config(&self, seed: Option<u64>) -> Result<ScenarioConfig, FormatError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(FormatError::Version(self.schema_version));
        }
        let seed = seed.or(self.seed);
        let staleness = StalenessModel::from_name(&self.staleness).ok_or_else(|| {
            let names: Vec<_> = StalenessModel::ALL.iter().map(|m| m.name()).collect();
            field(
                "staleness",
                format!(
                    "unknown model {:?}; expected one of {}",
                    self.staleness,
                    names.join(", ")
                ),
            )
        })?;
        let lambda_mode = match self.lambda_mode.as_str() {
            "strict" => LambdaMode::Strict,
            "exploratory" => LambdaMode::Exploratory,
            other => {
                return Err(field(
                    "lambda_mode",
                    format!("expected strict or exploratory, got {other:?}"),
                ))
            }
        };
        let goods = self.initial_prices.len();
        let timing = match &self.timing {
            TimingRecord::RoundRobin { period, offsets } => {
                let offsets = match (offsets, seed) {
                    (Some(o), _) => o.clone(),
                    (None, Some(s)) => draw_offsets(s, goods, *period),
                    (None, None) => {
                        return Err(FormatError::Invalid(
                            ConfigError::MissingSeed("round_robin").to_string(),
                        ))
                    }
                };
                TimingModel::RoundRobin {
                    period: *period,
                    offsets,
                }
            }
            TimingRecord::PoissonClipped { rates } => TimingModel::PoissonClipped {
                rates: rates.clone(),
            },
            TimingRecord::JitteredFixed { period, jitter } => TimingModel::JitteredFixed {
                period: *period,
                jitter: *jitter,
            },
            TimingRecord::Scripted { events } => TimingModel::Scripted {
                events: events.clone(),
            },
        };
        if self.timing.needs_seed() && seed.is_none() {
            return Err(FormatError::Invalid(
                ConfigError::MissingSeed(self.timing.name()).to_string(),
            ));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(field(
                "lambda",
                format!("must be positive and finite, got {}", self.lambda),
            ));
        }
        let mut config = ScenarioConfig::new(
            timing,
            staleness,
            self.lambda,
            self.horizon,
            self.initial_prices.clone(),
        )
        .with_lambda_mode(lambda_mode)
        .with_stop_tolerance(self.stop_tolerance);
        config.seed = seed;
        config
            .validate(goods)
            .map_err(|e| FormatError::Invalid(e.to_string()))?;
        Ok(config)
    }
}

pub fn scenario_from_str(text: &str) -> Result<ScenarioFile, FormatError> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(FormatError::Version(file.schema_version));
    }
    Ok(file)
}

pub fn scenario_to_string(scenario: &ScenarioFile) -> String {
    let mut s = serde_json::to_string_pretty(scenario).expect("scenario serializes");
    s.push('\n');
    s
}
