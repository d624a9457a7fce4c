//! Test-only oracles. Nothing here calls the closed-form demand code.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tatonnement::market::{Buyer, MarketInstance, UtilitySpec};

/// `ln u(x)` evaluated straight from the utility definition.
pub fn ln_utility(u: &UtilitySpec<f64>, x: &[f64]) -> f64 {
    match u {
        UtilitySpec::Ces { rho, weights } => {
            let terms: Vec<f64> = weights
                .iter()
                .zip(x)
                .filter(|(a, _)| **a > 0.0)
                .map(|(a, xj)| a.ln() + rho * xj.ln())
                .collect();
            let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !max.is_finite() {
                // some desired good has zero quantity
                return if *rho < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    max / rho
                };
            }
            let lse = max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln();
            lse / rho
        }
        UtilitySpec::CobbDouglas { weights } => weights
            .iter()
            .zip(x)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, xj)| a * xj.ln())
            .sum(),
        UtilitySpec::Leontief { coefficients } => coefficients
            .iter()
            .zip(x)
            .filter(|(c, _)| **c > 0.0)
            .map(|(c, xj)| (xj / c).ln())
            .fold(f64::INFINITY, f64::min),
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}

/// Numeric budget-constrained utility maximization.
///
/// CES and Cobb-Douglas: spending shares start uniform over desired goods and
/// are improved by exact pairwise share transfers (golden-section search on
/// each pair) until a full sweep gains nothing. Leontief: bisection on the
/// utility level, testing affordability of the cheapest bundle reaching it.
pub fn maximize_utility(u: &UtilitySpec<f64>, budget: f64, p: &[f64]) -> (Vec<f64>, f64) {
    let n = p.len();
    if let UtilitySpec::Leontief { coefficients } = u {
        // Reaching level t needs x_j >= t c_j for every j.
        let affordable = |t: f64| {
            coefficients
                .iter()
                .zip(p)
                .map(|(c, pj)| t * c * pj)
                .sum::<f64>()
                <= budget
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while affordable(hi) {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if affordable(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x: Vec<f64> = coefficients.iter().map(|c| lo * c).collect();
        return (x, lo);
    }

    let desired: Vec<usize> = (0..n).filter(|&j| u.parameters()[j] > 0.0).collect();
    let mut shares = vec![0.0; n];
    for &j in &desired {
        shares[j] = 1.0 / desired.len() as f64;
    }
    let bundle =
        |w: &[f64]| -> Vec<f64> { w.iter().zip(p).map(|(wj, pj)| wj * budget / pj).collect() };
    let mut best = ln_utility(u, &bundle(&shares));
    for _sweep in 0..20_000 {
        let before = best;
        for a in 0..desired.len() {
            for b in (a + 1)..desired.len() {
                let (j, k) = (desired[a], desired[b]);
                let pool = shares[j] + shares[k];
                let eval = |wj: f64| {
                    let mut w = shares.clone();
                    w[j] = wj;
                    w[k] = pool - wj;
                    ln_utility(u, &bundle(&w))
                };
                let wj = golden_max(eval, 0.0, pool, 1e-15 * pool.max(1e-300));
                let val = eval(wj);
                if val > best {
                    best = val;
                    shares[j] = wj;
                    shares[k] = pool - wj;
                }
            }
        }
        if best - before <= 1e-15 * best.abs().max(1.0) {
            break;
        }
    }
    let x = bundle(&shares);
    (x, best.exp())
}

/// Central difference of `f` along coordinate `j` with step `h`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, p: &[f64], j: usize, h: f64) -> f64 {
    let mut up = p.to_vec();
    let mut down = p.to_vec();
    up[j] += h;
    down[j] -= h;
    (f(&up) - f(&down)) / (2.0 * h)
}

/// Random market with `n, m <= 6`, CES `rho` in `[-10, 0.9] \ {0}`, plus
/// Leontief and Cobb-Douglas buyers.
pub fn random_market(rng: &mut ChaCha8Rng) -> MarketInstance<f64> {
    loop {
        let n = rng.random_range(1..=6usize);
        let m = rng.random_range(1..=6usize);
        let buyers: Vec<Buyer<f64>> = (0..m)
            .map(|_| {
                let budget = rng.random_range(0.2..5.0);
                let mut params: Vec<f64> = (0..n)
                    .map(|_| {
                        if rng.random_bool(0.2) {
                            0.0
                        } else {
                            rng.random_range(0.05..3.0)
                        }
                    })
                    .collect();
                if params.iter().all(|v| *v == 0.0) {
                    params[0] = 1.0;
                }
                let utility = match rng.random_range(0..5u32) {
                    0 => UtilitySpec::Leontief {
                        coefficients: params,
                    },
                    1 => {
                        let s: f64 = params.iter().sum();
                        let mut weights: Vec<f64> = params.iter().map(|v| v / s).collect();
                        let drift: f64 = weights.iter().sum::<f64>() - 1.0;
                        let last = weights.iter().rposition(|w| *w > 0.0).unwrap();
                        weights[last] -= drift;
                        UtilitySpec::CobbDouglas { weights }
                    }
                    _ => {
                        let mut rho = 0.0;
                        while rho == 0.0 {
                            rho = rng.random_range(-10.0..0.9);
                        }
                        UtilitySpec::Ces {
                            rho,
                            weights: params,
                        }
                    }
                };
                Buyer::new(budget, utility)
            })
            .collect();
        if let Ok(market) = MarketInstance::new(n, buyers) {
            return market;
        }
    }
}

pub fn random_prices(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.1..5.0)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
