use thiserror::Error;

use super::config::ScenarioConfig;
use super::staleness::{IntervalStats, Segment};
use crate::dynamics::GAP_TOLERANCE;
use crate::market::{MarketError, MarketInstance};

/// One asynchronous price update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateEvent {
    pub t: f64,
    pub good: usize,
    /// Time of this good's previous update, or 0.
    pub alpha_j: f64,
    pub dt: f64,
    pub z_tilde: f64,
    pub z_accurate: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub gamma: f64,
    pub p_before: f64,
    pub p_after: f64,
    /// Potential right after the update.
    pub phi: f64,
}

impl UpdateEvent {
    pub fn delta_p(&self) -> f64 {
        self.p_after - self.p_before
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Horizon,
    Converged,
    ScheduleExhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Horizon => "horizon",
            StopReason::Converged => "converged",
            StopReason::ScheduleExhausted => "schedule_exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("event {index}: time {t} is earlier than the previous event")]
    OutOfOrder { index: usize, t: f64 },
    #[error("event {index}: good {good} out of range")]
    GoodRange { index: usize, good: usize },
    #[error("event {index}: alpha_j {found} does not match the previous update at {expected}")]
    Chain {
        index: usize,
        expected: f64,
        found: f64,
    },
    #[error("event {index}: dt {dt} outside (0, 1]")]
    Gap { index: usize, dt: f64 },
    #[error("event {index}: p_before {found} does not match the current price {expected}")]
    PriceChain {
        index: usize,
        expected: f64,
        found: f64,
    },
    #[error("event {index}: same good updated twice at time {t}")]
    Duplicate { index: usize, t: f64 },
    #[error("good {0} never updates, so its starting price is unknown")]
    UnknownStart(usize),
    #[error("interval ({from}, {to}] is not inside the simulated range [0, {end}]")]
    Interval { from: f64, to: f64, end: f64 },
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// Ordered event log of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub lambda: f64,
    pub initial_prices: Vec<f64>,
    pub events: Vec<UpdateEvent>,
    pub final_prices: Vec<f64>,
    pub end_time: f64,
    pub stop: StopReason,
    /// Poisson gaps cut to one time unit.
    pub capped_gaps: usize,
    pub config: Option<ScenarioConfig>,
}

impl SimulationTrace {
    /// Rebuilds a trace from its events alone; each good's starting price is
    /// its first `p_before`.
    pub fn from_events(
        goods: usize,
        lambda: f64,
        events: Vec<UpdateEvent>,
    ) -> Result<Self, TraceError> {
        let mut initial = vec![f64::NAN; goods];
        for e in &events {
            if e.good >= goods {
                return Err(TraceError::GoodRange {
                    index: 0,
                    good: e.good,
                });
            }
            if initial[e.good].is_nan() {
                initial[e.good] = e.p_before;
            }
        }
        if let Some(g) = initial.iter().position(|p| p.is_nan()) {
            return Err(TraceError::UnknownStart(g));
        }
        let mut final_prices = initial.clone();
        for e in &events {
            final_prices[e.good] = e.p_after;
        }
        let trace = SimulationTrace {
            lambda,
            end_time: events.last().map(|e| e.t).unwrap_or(0.0),
            initial_prices: initial,
            events,
            final_prices,
            stop: StopReason::ScheduleExhausted,
            capped_gaps: 0,
            config: None,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn goods(&self) -> usize {
        self.initial_prices.len()
    }

    /// Price vectors: entry 0 is the start, entry `k + 1` follows event `k`.
    pub fn states(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.events.len() + 1);
        let mut p = self.initial_prices.clone();
        out.push(p.clone());
        for e in &self.events {
            p[e.good] = e.p_after;
            out.push(p.clone());
        }
        out
    }

    /// Start time of each state in [`states`](Self::states).
    pub fn state_times(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.events.iter().map(|e| e.t))
            .collect()
    }

    /// For each event, the index of the previous event on the same good.
    pub fn previous_events(&self) -> Vec<Option<usize>> {
        let mut last = vec![None; self.goods()];
        self.events
            .iter()
            .enumerate()
            .map(|(k, e)| last[e.good].replace(k))
            .collect()
    }

    /// Prices in force at time `t`, i.e. after every event at or before `t`.
    pub fn prices_at(&self, t: f64) -> Vec<f64> {
        let mut p = self.initial_prices.clone();
        for e in self.events.iter().take_while(|e| e.t <= t) {
            p[e.good] = e.p_after;
        }
        p
    }

    /// Largest price seen anywhere in the run.
    pub fn max_price(&self) -> f64 {
        self.events
            .iter()
            .map(|e| e.p_after)
            .chain(self.initial_prices.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks ordering, `alpha_j` chaining, the gap law and price chaining.
    pub fn validate(&self) -> Result<(), TraceError> {
        let mut last_time = vec![0.0; self.goods()];
        let mut seen = vec![false; self.goods()];
        let mut p = self.initial_prices.clone();
        let mut prev_t = 0.0;
        for (index, e) in self.events.iter().enumerate() {
            if e.good >= self.goods() {
                return Err(TraceError::GoodRange {
                    index,
                    good: e.good,
                });
            }
            if e.t < prev_t {
                return Err(TraceError::OutOfOrder { index, t: e.t });
            }
            if seen[e.good] && e.t == last_time[e.good] {
                return Err(TraceError::Duplicate { index, t: e.t });
            }
            if e.alpha_j != last_time[e.good] {
                return Err(TraceError::Chain {
                    index,
                    expected: last_time[e.good],
                    found: e.alpha_j,
                });
            }
            if !(e.dt > 0.0 && e.dt <= 1.0 + GAP_TOLERANCE) {
                return Err(TraceError::Gap { index, dt: e.dt });
            }
            if e.p_before != p[e.good] {
                return Err(TraceError::PriceChain {
                    index,
                    expected: p[e.good],
                    found: e.p_before,
                });
            }
            p[e.good] = e.p_after;
            last_time[e.good] = e.t;
            seen[e.good] = true;
            prev_t = e.t;
        }
        Ok(())
    }
}

/// Exact statistics of `z_good` over `(t_from, t_to]`, reading prices from
/// the trace. Prices are piecewise constant, so `z` is evaluated once per
/// breakpoint; events sharing a timestamp collapse into one breakpoint.
pub fn interval_z_stats(
    trace: &SimulationTrace,
    market: &MarketInstance<f64>,
    good: usize,
    t_from: f64,
    t_to: f64,
) -> Result<IntervalStats, TraceError> {
    if !(t_from >= 0.0
        && t_from < t_to
        && t_to <= trace.end_time.max(trace.events.last().map_or(0.0, |e| e.t)))
    {
        return Err(TraceError::Interval {
            from: t_from,
            to: t_to,
            end: trace.end_time,
        });
    }
    if good >= trace.goods() {
        return Err(TraceError::GoodRange { index: 0, good });
    }
    let mut cuts = vec![t_from];
    cuts.extend(
        trace
            .events
            .iter()
            .map(|e| e.t)
            .filter(|t| *t > t_from && *t < t_to),
    );
    cuts.dedup();
    cuts.push(t_to);
    let mut segments = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        let z = market.excess_demand(&trace.prices_at(w[0]))?[good];
        segments.push(Segment {
            start: w[0],
            end: w[1],
            z,
        });
    }
    let z_accurate = segments.last().map(|s| s.z).unwrap_or(f64::NAN);
    Ok(IntervalStats::from_segments(segments, z_accurate))
}
