use thiserror::Error;

use super::lipschitz::{in_factor, out_factor, pair_bound};
use crate::dynamics::analysis_constants;
use crate::market::{DemandProfile, MarketError, MarketInstance};
use crate::scheduler::{SimulationTrace, TraceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("trace has {trace} goods but the market has {market}")]
    GoodCount { trace: usize, market: usize },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("not enough points to fit: {0}")]
    Fit(&'static str),
}

/// Everything the checkers need, computed once per trace.
///
/// State `s` is the price vector before event `s` (and after event `s - 1`).
pub struct TraceContext<'a> {
    pub market: &'a MarketInstance<f64>,
    pub trace: &'a SimulationTrace,
    pub states: Vec<Vec<f64>>,
    pub profiles: Vec<DemandProfile<f64>>,
    pub phi: Vec<f64>,
    pub previous: Vec<Option<usize>>,
    pub c1: f64,
    pub out_factor: f64,
    pub in_factor: f64,
    /// `bank_terms[e][k]`: the per-good contribution of event `e` to the
    /// bank before the `c1` and indicator factors.
    pub bank_terms: Vec<Vec<f64>>,
}

impl<'a> TraceContext<'a> {
    pub fn new(
        trace: &'a SimulationTrace,
        market: &'a MarketInstance<f64>,
    ) -> Result<Self, AnalysisError> {
        if trace.goods() != market.goods() {
            return Err(AnalysisError::GoodCount {
                trace: trace.goods(),
                market: market.goods(),
            });
        }
        trace.validate()?;
        let states = trace.states();
        let profiles = states
            .iter()
            .map(|p| market.demand_profile(p))
            .collect::<Result<Vec<_>, _>>()?;
        let phi = states
            .iter()
            .map(|p| market.potential(p))
            .collect::<Result<Vec<_>, _>>()?;
        let lambda = trace.lambda;
        let out = out_factor(market, lambda);
        let mut ctx = TraceContext {
            market,
            trace,
            previous: trace.previous_events(),
            c1: analysis_constants(lambda).c1,
            out_factor: out,
            in_factor: in_factor(market, lambda),
            bank_terms: Vec::new(),
            states,
            profiles,
            phi,
        };
        ctx.bank_terms = (0..trace.events.len())
            .map(|e| ctx.event_terms(e))
            .collect();
        Ok(ctx)
    }

    fn event_terms(&self, e: usize) -> Vec<f64> {
        let ev = &self.trace.events[e];
        let j = ev.good;
        let p = &self.states[e];
        let step = ev.delta_p() * ev.delta_p() / ev.dt;
        (0..self.market.goods())
            .map(|k| {
                if k == j {
                    0.0
                } else {
                    self.pair(e, j, k) * p[k] / p[j] * step
                }
            })
            .collect()
    }

    /// Bound on `|d^2 phi / dp_j dp_k|` around state `s`.
    pub fn pair(&self, s: usize, j: usize, k: usize) -> f64 {
        pair_bound(self.market, &self.profiles[s], self.out_factor, j, k)
    }

    /// Excess demand of the updated good at the exact pre-update state.
    pub fn z_pre(&self, e: usize) -> f64 {
        self.profiles[e].z[self.trace.events[e].good]
    }

    /// Events strictly between the previous update of event `e`'s good and `e`.
    pub fn window(&self, e: usize) -> std::ops::Range<usize> {
        self.previous[e].map_or(0, |q| q + 1)..e
    }

    /// Bank right after event `e`, with its window anchored at `t_e`.
    pub fn bank_after(&self, e: usize) -> f64 {
        self.bank(e, self.trace.events[e].t - 1.0)
    }

    /// Bank over events `..=last` whose time exceeds `window_start`.
    pub(crate) fn bank(&self, last: usize, window_start: f64) -> f64 {
        let n = self.market.goods();
        let mut updated = vec![false; n];
        let mut total = 0.0;
        for eps in (0..=last).rev() {
            let ev = &self.trace.events[eps];
            if ev.t <= window_start {
                break;
            }
            for (k, term) in self.bank_terms[eps].iter().enumerate() {
                if k != ev.good {
                    total += if updated[k] { *term } else { 2.0 * term };
                }
            }
            updated[ev.good] = true;
        }
        self.c1 * total
    }

    /// `Phi` at every state: `Phi[0] = phi(start)`, `Phi[e + 1] = phi + A`
    /// right after event `e`.
    pub fn phi_with_bank(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.phi.len());
        out.push(self.phi[0]);
        for e in 0..self.trace.events.len() {
            out.push(self.phi[e + 1] + self.bank_after(e));
        }
        out
    }
}

/// Amortization bank at time `t`: updates in `(t - 1, t]`, each good's
/// indicator reading whether it was updated after that update and by `t`.
pub fn amortization_bank(ctx: &TraceContext<'_>, t: f64) -> f64 {
    let count = ctx.trace.events.partition_point(|e| e.t <= t);
    if count == 0 {
        return 0.0;
    }
    ctx.bank(count - 1, t - 1.0)
}
