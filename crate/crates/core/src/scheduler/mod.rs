//! Discrete-event simulation of asynchronous price updates.
//!
//! State `0` is the starting price vector at time 0 and state `k + 1` is the
//! vector after event `k`. Events at equal times run in good order, so the
//! states in between exist for zero time; they are included in each
//! interval's `z_min`/`z_max` but carry no weight in averages, and
//! `z_accurate` is read from the last state that precedes the update time
//! strictly.

mod clock;
pub mod config;
pub mod staleness;
pub mod trace;

use thiserror::Error;

pub use config::{
    ConfigError, ScenarioConfig, StalenessModel, TimingModel, DEFAULT_STOP_TOLERANCE,
};
pub use staleness::{observe_z_tilde, IntervalStats, Segment};
pub use trace::{interval_z_stats, SimulationTrace, StopReason, TraceError, UpdateEvent};

use crate::dynamics::{async_step, StepError, StepParams};
use crate::market::{MarketError, MarketInstance};
use clock::{staleness_stream, Clock};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("lambda: {0}")]
    Lambda(StepError),
    #[error("market has {market} goods but the scenario describes {scenario}")]
    GoodCount { market: usize, scenario: usize },
    #[error("event {event}: {source}")]
    Step { event: usize, source: StepError },
    #[error("event {event}: {source}")]
    Market { event: usize, source: MarketError },
    #[error("event {event}: non-finite {what}")]
    NonFinite { event: usize, what: &'static str },
}

/// Runs the scenario to its horizon or until `max_j |z_j|` drops below the
/// stop tolerance.
pub fn run_simulation(
    market: &MarketInstance<f64>,
    config: &ScenarioConfig,
) -> Result<SimulationTrace, SimulationError> {
    let n = market.goods();
    if config.initial_prices.len() != n {
        return Err(SimulationError::GoodCount {
            market: n,
            scenario: config.initial_prices.len(),
        });
    }
    config.validate(n)?;
    let params = StepParams::new(
        config.lambda,
        market.class(),
        market.e_factor(),
        config.lambda_mode,
    )
    .map_err(SimulationError::Lambda)?;
    let lambda = params.lambda();

    let seed = config.seed.unwrap_or(0);
    let mut clock = Clock::new(&config.timing, n, seed);
    let mut observe_rngs: Vec<_> = (0..n).map(|j| staleness_stream(seed, j)).collect();
    let end = match &config.timing {
        TimingModel::Scripted { events } => {
            let last = events.iter().map(|e| e.0).fold(0.0, f64::max);
            config.horizon.min(last)
        }
        _ => config.horizon,
    };

    let mut prices: Vec<Vec<f64>> = vec![config.initial_prices.clone()];
    let mut excess: Vec<Vec<f64>> = vec![market
        .excess_demand(&config.initial_prices)
        .map_err(|source| SimulationError::Market { event: 0, source })?];
    let mut times = vec![0.0];
    let mut events: Vec<UpdateEvent> = Vec::new();
    let mut last: Vec<Option<usize>> = vec![None; n];
    // number of events strictly before the current event time
    let mut before_now = 0usize;
    let mut stop = StopReason::ScheduleExhausted;

    while let Some((t, j)) = clock.pop() {
        if t > end {
            stop = StopReason::Horizon;
            break;
        }
        let k = events.len();
        if k > 0 && t > events[k - 1].t {
            before_now = k;
        }
        let from = last[j].map_or(0, |e| e + 1);
        let alpha_j = last[j].map_or(0.0, |e| events[e].t);
        let segments: Vec<Segment> = (from..=k)
            .map(|s| Segment {
                start: times[s],
                end: if s < k { times[s + 1] } else { t },
                z: excess[s][j],
            })
            .collect();
        let stats = IntervalStats::from_segments(segments, excess[before_now][j]);
        let z_tilde = observe_z_tilde(&stats, config.staleness, &mut observe_rngs[j]);

        let p_before = prices[k][j];
        let dt = t - alpha_j;
        let (p_after, record) = async_step(p_before, z_tilde, lambda, dt)
            .map_err(|source| SimulationError::Step { event: k, source })?;
        if !p_after.is_finite() {
            return Err(SimulationError::NonFinite {
                event: k,
                what: "price",
            });
        }
        let mut p = prices[k].clone();
        p[j] = p_after;
        let profile = market
            .demand_profile(&p)
            .map_err(|source| SimulationError::Market { event: k, source })?;
        if profile.z.iter().any(|z| !z.is_finite()) {
            return Err(SimulationError::NonFinite {
                event: k,
                what: "excess demand",
            });
        }
        let phi = market
            .potential(&p)
            .map_err(|source| SimulationError::Market { event: k, source })?;
        if !phi.is_finite() {
            return Err(SimulationError::NonFinite {
                event: k,
                what: "potential",
            });
        }

        events.push(UpdateEvent {
            t,
            good: j,
            alpha_j,
            dt,
            z_tilde,
            z_accurate: stats.z_accurate,
            z_min: stats.z_min,
            z_max: stats.z_max,
            gamma: record.gamma,
            p_before,
            p_after,
            phi,
        });
        let converged = config
            .stop_tolerance
            .is_some_and(|tol| profile.z.iter().all(|z| z.abs() < tol));
        prices.push(p);
        excess.push(profile.z);
        times.push(t);
        last[j] = Some(k);
        clock.reschedule(j, t);
        if converged {
            stop = StopReason::Converged;
            break;
        }
    }

    let end_time = match stop {
        StopReason::Converged => events.last().map_or(0.0, |e| e.t),
        _ => end,
    };
    Ok(SimulationTrace {
        lambda,
        initial_prices: config.initial_prices.clone(),
        final_prices: prices.pop().expect("state 0 always exists"),
        events,
        end_time,
        stop,
        capped_gaps: clock.capped_gaps,
        config: Some(config.clone()),
    })
}
