use thiserror::Error;

use crate::dynamics::{LambdaMode, GAP_TOLERANCE};

/// Default early-stop threshold on `max_j |z_j|`.
pub const DEFAULT_STOP_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("initial_prices: expected {expected} entries, got {got}")]
    PriceCount { expected: usize, got: usize },
    #[error("initial_prices[{good}]: price must be positive and finite, got {value}")]
    InitialPrice { good: usize, value: f64 },
    #[error("timing.{field}: {reason}")]
    Timing { field: &'static str, reason: String },
    #[error("stop_tolerance must be positive, got {0}")]
    StopTolerance(f64),
    #[error("a seed is required for the {0} model")]
    MissingSeed(&'static str),
}

fn timing_err(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Timing {
        field,
        reason: reason.into(),
    }
}

/// When each good's seller posts a price update.
#[derive(Debug, Clone, PartialEq)]
pub enum TimingModel {
    /// Good `j` updates at `offsets[j] + k * period` for every such time > 0.
    RoundRobin { period: f64, offsets: Vec<f64> },
    /// Exponential gaps with per-good rate, each gap capped at one time unit.
    PoissonClipped { rates: Vec<f64> },
    /// Gaps drawn uniformly from `period +- jitter`; the first update lands in
    /// `(0, period]`.
    JitteredFixed { period: f64, jitter: f64 },
    /// Explicit `(time, good)` list.
    Scripted { events: Vec<(f64, usize)> },
}

impl TimingModel {
    pub fn name(&self) -> &'static str {
        match self {
            TimingModel::RoundRobin { .. } => "round_robin",
            TimingModel::PoissonClipped { .. } => "poisson_clipped",
            TimingModel::JitteredFixed { .. } => "jittered_fixed",
            TimingModel::Scripted { .. } => "scripted",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            TimingModel::PoissonClipped { .. } | TimingModel::JitteredFixed { .. }
        )
    }

    /// Rejects any model that could leave a good without an update for more
    /// than one time unit.
    pub fn validate(&self, goods: usize, horizon: f64) -> Result<(), ConfigError> {
        match self {
            TimingModel::RoundRobin { period, offsets } => {
                if !(*period > 0.0 && *period <= 1.0) {
                    return Err(timing_err(
                        "period",
                        format!("must lie in (0, 1], got {period}"),
                    ));
                }
                if offsets.len() != goods {
                    return Err(timing_err(
                        "offsets",
                        format!("expected {goods} entries, got {}", offsets.len()),
                    ));
                }
                if let Some(o) = offsets.iter().find(|o| !(**o >= 0.0 && **o < *period)) {
                    return Err(timing_err(
                        "offsets",
                        format!("offset {o} outside [0, period)"),
                    ));
                }
            }
            TimingModel::PoissonClipped { rates } => {
                if rates.len() != goods {
                    return Err(timing_err(
                        "rates",
                        format!("expected {goods} entries, got {}", rates.len()),
                    ));
                }
                if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
                    return Err(timing_err(
                        "rates",
                        format!("rate {r} must be positive and finite"),
                    ));
                }
            }
            TimingModel::JitteredFixed { period, jitter } => {
                if !(*period > 0.0 && period.is_finite()) {
                    return Err(timing_err(
                        "period",
                        format!("must be positive, got {period}"),
                    ));
                }
                if !(*jitter >= 0.0 && jitter < period) {
                    return Err(timing_err(
                        "jitter",
                        format!("must lie in [0, period), got {jitter}"),
                    ));
                }
                if period + jitter > 1.0 {
                    return Err(timing_err(
                        "jitter",
                        "period + jitter exceeds one time unit",
                    ));
                }
            }
            TimingModel::Scripted { events } => validate_script(events, goods, horizon)?,
        }
        Ok(())
    }
}

fn validate_script(events: &[(f64, usize)], goods: usize, horizon: f64) -> Result<(), ConfigError> {
    if events.is_empty() {
        return Err(timing_err("events", "script is empty"));
    }
    let mut sorted = events.to_vec();
    for &(t, g) in &sorted {
        if !(t > 0.0 && t.is_finite()) {
            return Err(timing_err(
                "events",
                format!("time {t} must be positive and finite"),
            ));
        }
        if g >= goods {
            return Err(timing_err(
                "events",
                format!("good {g} out of range for {goods} goods"),
            ));
        }
    }
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(timing_err(
            "events",
            format!("good {} scheduled twice at time {}", w[0].1, w[0].0),
        ));
    }
    let end = horizon.min(sorted.last().map(|e| e.0).unwrap_or(0.0));
    for g in 0..goods {
        if !sorted.iter().any(|e| e.1 == g) {
            return Err(timing_err("events", format!("good {g} is never updated")));
        }
        let mut last = 0.0;
        for &(t, _) in sorted.iter().filter(|e| e.1 == g && e.0 <= end) {
            if t - last > 1.0 + GAP_TOLERANCE {
                return Err(timing_err(
                    "events",
                    format!(
                        "good {g} waits {} time units before the update at {t}",
                        t - last
                    ),
                ));
            }
            last = t;
        }
        if end - last > 1.0 + GAP_TOLERANCE {
            return Err(timing_err(
                "events",
                format!("good {g} is not updated during ({last}, {end}]"),
            ));
        }
    }
    Ok(())
}

/// How the observed excess demand is chosen from the interval since the
/// good's previous update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StalenessModel {
    /// Instantaneous excess demand just before the update.
    Endpoint,
    /// Excess demand right after the previous update.
    Start,
    /// Time-weighted average over the interval.
    TimeWeightedAverage,
    /// Excess demand at a uniformly drawn time in the interval.
    RandomPoint,
    /// Whichever interval extreme is farthest from the accurate value.
    AdversarialMaxGap,
}

impl StalenessModel {
    pub const ALL: [StalenessModel; 5] = [
        StalenessModel::Endpoint,
        StalenessModel::Start,
        StalenessModel::TimeWeightedAverage,
        StalenessModel::RandomPoint,
        StalenessModel::AdversarialMaxGap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StalenessModel::Endpoint => "endpoint",
            StalenessModel::Start => "start",
            StalenessModel::TimeWeightedAverage => "time_weighted_average",
            StalenessModel::RandomPoint => "random_point",
            StalenessModel::AdversarialMaxGap => "adversarial_max_gap",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn is_stochastic(self) -> bool {
        self == StalenessModel::RandomPoint
    }
}

/// Everything needed to run one simulation, apart from the market.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub timing: TimingModel,
    pub staleness: StalenessModel,
    pub lambda: f64,
    pub lambda_mode: LambdaMode,
    pub horizon: f64,
    /// Required when the timing or staleness model draws random numbers.
    pub seed: Option<u64>,
    pub initial_prices: Vec<f64>,
    /// Stop once `max_j |z_j|` falls below this; `None` runs to the horizon.
    pub stop_tolerance: Option<f64>,
}

impl ScenarioConfig {
    pub fn new(
        timing: TimingModel,
        staleness: StalenessModel,
        lambda: f64,
        horizon: f64,
        initial_prices: Vec<f64>,
    ) -> Self {
        ScenarioConfig {
            timing,
            staleness,
            lambda,
            lambda_mode: LambdaMode::Strict,
            horizon,
            seed: None,
            initial_prices,
            stop_tolerance: Some(DEFAULT_STOP_TOLERANCE),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_stop_tolerance(mut self, tol: Option<f64>) -> Self {
        self.stop_tolerance = tol;
        self
    }

    pub fn with_lambda_mode(mut self, mode: LambdaMode) -> Self {
        self.lambda_mode = mode;
        self
    }

    pub fn is_stochastic(&self) -> bool {
        self.timing.is_stochastic() || self.staleness.is_stochastic()
    }

    /// Checks everything that does not depend on the market's constants.
    pub fn validate(&self, goods: usize) -> Result<(), ConfigError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(ConfigError::Horizon(self.horizon));
        }
        if self.initial_prices.len() != goods {
            return Err(ConfigError::PriceCount {
                expected: goods,
                got: self.initial_prices.len(),
            });
        }
        if let Some(good) = self
            .initial_prices
            .iter()
            .position(|p| !(p.is_finite() && *p > 0.0))
        {
            return Err(ConfigError::InitialPrice {
                good,
                value: self.initial_prices[good],
            });
        }
        if let Some(tol) = self.stop_tolerance {
            if !(tol > 0.0) {
                return Err(ConfigError::StopTolerance(tol));
            }
        }
        if self.seed.is_none() {
            if self.timing.is_stochastic() {
                return Err(ConfigError::MissingSeed(self.timing.name()));
            }
            if self.staleness.is_stochastic() {
                return Err(ConfigError::MissingSeed(self.staleness.name()));
            }
        }
        self.timing.validate(goods, self.horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_robin_rules() {
        let ok = TimingModel::RoundRobin {
            period: 1.0,
            offsets: vec![0.0, 0.5],
        };
        assert!(ok.validate(2, 10.0).is_ok());
        let long = TimingModel::RoundRobin {
            period: 1.5,
            offsets: vec![0.0, 0.5],
        };
        assert!(long.validate(2, 10.0).is_err());
        let bad_offset = TimingModel::RoundRobin {
            period: 1.0,
            offsets: vec![0.0, 1.0],
        };
        assert!(bad_offset.validate(2, 10.0).is_err());
    }

    #[test]
    fn jitter_must_respect_unit_gap() {
        assert!(TimingModel::JitteredFixed {
            period: 0.8,
            jitter: 0.2
        }
        .validate(3, 5.0)
        .is_ok());
        assert!(TimingModel::JitteredFixed {
            period: 0.9,
            jitter: 0.2
        }
        .validate(3, 5.0)
        .is_err());
    }

    #[test]
    fn scripts_are_checked_for_gaps_and_duplicates() {
        let script = vec![(0.5, 0), (1.0, 1), (1.4, 0), (2.0, 1)];
        assert!(TimingModel::Scripted {
            events: script.clone()
        }
        .validate(2, 10.0)
        .is_ok());
        let gap = vec![(0.5, 0), (1.0, 1), (2.0, 0), (2.0, 1)];
        assert!(TimingModel::Scripted { events: gap }
            .validate(2, 10.0)
            .is_err());
        let dup = vec![(0.5, 0), (0.5, 0), (1.0, 1)];
        assert!(TimingModel::Scripted { events: dup }
            .validate(2, 10.0)
            .is_err());
        let never = vec![(0.5, 0), (1.0, 0)];
        assert!(TimingModel::Scripted { events: never }
            .validate(2, 10.0)
            .is_err());
    }

    #[test]
    fn stochastic_models_need_a_seed() {
        let cfg = ScenarioConfig::new(
            TimingModel::PoissonClipped {
                rates: vec![2.0, 2.0],
            },
            StalenessModel::Endpoint,
            0.03,
            10.0,
            vec![1.0, 1.0],
        );
        assert_eq!(
            cfg.validate(2),
            Err(ConfigError::MissingSeed("poisson_clipped"))
        );
        assert!(cfg.clone().with_seed(3).validate(2).is_ok());

        let rp = ScenarioConfig::new(
            TimingModel::RoundRobin {
                period: 1.0,
                offsets: vec![0.0, 0.0],
            },
            StalenessModel::RandomPoint,
            0.03,
            10.0,
            vec![1.0, 1.0],
        );
        assert_eq!(
            rp.validate(2),
            Err(ConfigError::MissingSeed("random_point"))
        );
    }

    #[test]
    fn staleness_names_round_trip() {
        for m in StalenessModel::ALL {
            assert_eq!(StalenessModel::from_name(m.name()), Some(m));
        }
        assert_eq!(StalenessModel::from_name("latest"), None);
    }
}
