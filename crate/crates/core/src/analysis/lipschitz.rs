use crate::market::{DemandProfile, MarketError, MarketInstance};

/// `theta exp((8E - 4) lambda (lambda + 1))`: inflation applied to
/// pairwise cross-partials evaluated at the reference prices.
pub fn out_factor(market: &MarketInstance<f64>, lambda: f64) -> f64 {
    let e = market.e_factor();
    market.theta() * ((8.0 * e - 4.0) * lambda * (lambda + 1.0)).exp()
}

/// `2 theta exp(8 E lambda (lambda + 1))`.
pub fn in_factor(market: &MarketInstance<f64>, lambda: f64) -> f64 {
    let e = market.e_factor();
    2.0 * market.theta() * (8.0 * e * lambda * (lambda + 1.0)).exp()
}

/// `sum_i x_ij x_ik / e_i`.
pub(crate) fn coupling(
    market: &MarketInstance<f64>,
    profile: &DemandProfile<f64>,
    j: usize,
    k: usize,
) -> f64 {
    market
        .buyers()
        .iter()
        .zip(&profile.x)
        .map(|(b, x)| x[j] * x[k] / b.budget)
        .sum()
}

/// Upper bound on `|d^2 phi / dp_j dp_k|` over every price vector reachable
/// within one time unit of `profile`'s prices.
pub(crate) fn pair_bound(
    market: &MarketInstance<f64>,
    profile: &DemandProfile<f64>,
    factor: f64,
    j: usize,
    k: usize,
) -> f64 {
    factor * coupling(market, profile, j, k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzBounds {
    /// Bound on `sum_{k != j} L_jk p_k / p_j`.
    pub sum_out: f64,
    /// Bound on the stale-window sum of `L_kj dt p_k / p_j`.
    pub sum_in: f64,
    /// `sum_{k != j} |d^2 phi / dp_j dp_k| p_k / p_j` at the reference prices.
    pub raw_sum: f64,
    /// `theta x_j / p_j`, the budget bound on `raw_sum`.
    pub raw_bound: f64,
}

/// Pairwise bounds for good `j` at `p_ref`.
pub fn pairwise_lipschitz_bound(
    market: &MarketInstance<f64>,
    p_ref: &[f64],
    j: usize,
    lambda: f64,
) -> Result<LipschitzBounds, MarketError> {
    let profile = market.demand_profile(p_ref)?;
    let x_j = profile.z[j] + 1.0;
    let mut raw_sum = 0.0;
    for k in (0..market.goods()).filter(|&k| k != j) {
        raw_sum += market.hessian_cross(p_ref, j, k)?.abs() * p_ref[k] / p_ref[j];
    }
    let per_price = x_j / p_ref[j];
    Ok(LipschitzBounds {
        sum_out: out_factor(market, lambda) * per_price,
        sum_in: in_factor(market, lambda) * per_price,
        raw_sum,
        raw_bound: market.theta() * per_price,
    })
}
