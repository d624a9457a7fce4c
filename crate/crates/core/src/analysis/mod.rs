//! Potential accounting and per-update inequality checks on simulated traces.
//!
//! Checkers only report; [`CheckSummary::all_pass`] is what a harness turns
//! into a verdict.

mod checks;
mod context;
mod equilibrium;
mod fit;
mod lipschitz;

pub use checks::{
    descent_margin, gamma_requirement_check, hessian_sum_check, leontief_drop_check,
    leontief_progress_check, phi_with_bank_monotone, shift_margin, InequalityReport,
    DEFAULT_EPS_MIN, DEFAULT_REL_TOLERANCE,
};
pub use context::{amortization_bank, AnalysisError, TraceContext};
pub use equilibrium::{
    equilibrium_residual, reference_equilibrium, reference_start, zero_price_thresholds,
    EquilibriumCertificate, ResidualMode, MAX_ITERATIONS, REFINE_ITERATIONS, ZERO_PRICE_FACTOR,
};
pub use fit::{convergence_fit, fit_gap_series, noise_floor, ConvergenceFit};
pub use lipschitz::{in_factor, out_factor, pairwise_lipschitz_bound, LipschitzBounds};

use crate::market::MarketClass;
use crate::market::MarketInstance;
use crate::scheduler::SimulationTrace;

/// Names of the checkers in report order.
pub const CHECKERS: [&str; 8] = [
    "descent",
    "gamma_out",
    "gamma_in",
    "hessian_sum",
    "stale_shift",
    "phi_monotone",
    "leontief_progress",
    "leontief_drop",
];

#[derive(Debug, Clone)]
pub struct CheckSummary {
    pub reports: Vec<InequalityReport>,
    /// Largest price seen in the trace.
    pub max_price: f64,
    pub final_residual: f64,
}

impl CheckSummary {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityReport> {
        self.reports.iter().filter(|r| !r.pass)
    }

    /// `(checked, failed)` for one checker.
    pub fn counts(&self, checker: &str) -> (usize, usize) {
        let mine = self.reports.iter().filter(|r| r.checker == checker);
        mine.fold((0, 0), |(n, f), r| (n + 1, f + usize::from(!r.pass)))
    }

    /// Most negative margin per checker, as `(checker, margin)`.
    pub fn worst(&self) -> Vec<(&'static str, f64)> {
        CHECKERS
            .iter()
            .filter_map(|c| {
                self.reports
                    .iter()
                    .filter(|r| r.checker == *c)
                    .map(|r| r.margin)
                    .reduce(f64::min)
                    .map(|m| (*c, m))
            })
            .collect()
    }
}

/// Runs every checker on a trace. The Leontief drop and progress checks only
/// run on Leontief markets.
pub fn check_trace(
    trace: &SimulationTrace,
    market: &MarketInstance<f64>,
) -> Result<CheckSummary, AnalysisError> {
    let ctx = TraceContext::new(trace, market)?;
    let mut reports = Vec::new();
    for e in 0..trace.events.len() {
        reports.push(descent_margin(&ctx, e));
        reports.extend(gamma_requirement_check(&ctx, e));
        reports.push(hessian_sum_check(&ctx, e));
        reports.push(shift_margin(&trace.events[e], e, ctx.z_pre(e)));
    }
    reports.extend(phi_with_bank_monotone(&ctx));
    let max_price = trace.max_price();
    if market.class() == MarketClass::Leontief {
        let big_phi = ctx.phi_with_bank();
        reports.extend(leontief_progress_check(&ctx, &big_phi));
        reports.extend(leontief_drop_check(
            &ctx,
            &big_phi,
            max_price,
            DEFAULT_EPS_MIN,
        ));
    }
    let last = ctx.states.last().expect("state 0 always exists");
    let final_residual = equilibrium_residual(
        market,
        last,
        &zero_price_thresholds(&trace.initial_prices),
        ResidualMode::Market,
    )?;
    Ok(CheckSummary {
        reports,
        max_price,
        final_residual,
    })
}
