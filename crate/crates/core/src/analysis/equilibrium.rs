use crate::dynamics::{max_safe_lambda, sync_step};
use crate::market::{MarketError, MarketInstance};

/// Iteration cap for the reference solver.
pub const MAX_ITERATIONS: usize = 1_000_000;
/// Length of the fine-step refinement pass for Leontief markets.
pub const REFINE_ITERATIONS: usize = 100_000;
/// Zero-price threshold relative to the starting price.
pub const ZERO_PRICE_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualMode {
    /// Zero-priced goods may be over-supplied but not over-demanded.
    Market,
    /// Goods priced at or below the threshold are ignored.
    Pseudo,
}

/// Largest equilibrium violation: `|z_j|` for goods priced above `tol_p[j]`,
/// `max(z_j, 0)` for the rest (or nothing, in pseudo mode).
pub fn equilibrium_residual(
    market: &MarketInstance<f64>,
    p: &[f64],
    tol_p: &[f64],
    mode: ResidualMode,
) -> Result<f64, MarketError> {
    let z = market.excess_demand(p)?;
    Ok(z.iter()
        .zip(p)
        .zip(tol_p)
        .map(|((zj, pj), tol)| {
            if pj > tol {
                zj.abs()
            } else if mode == ResidualMode::Market {
                zj.max(0.0)
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max))
}

/// Default zero-price thresholds for a run started at `initial`.
pub fn zero_price_thresholds(initial: &[f64]) -> Vec<f64> {
    initial.iter().map(|p| ZERO_PRICE_FACTOR * p).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCertificate {
    pub p_star: Vec<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub iterations: usize,
    /// `"sync_tatonnement"` or `"unconverged"`.
    pub method: &'static str,
    /// Smallest potential seen, after refinement for Leontief markets.
    pub phi_star: f64,
}

impl EquilibriumCertificate {
    pub fn valid(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Starting prices of the reference solver: total budget split evenly.
pub fn reference_start(market: &MarketInstance<f64>) -> Vec<f64> {
    let money: f64 = market.buyers().iter().map(|b| b.budget).sum();
    vec![money / market.goods() as f64; market.goods()]
}

/// Synchronous tatonnement at a quarter of the safe step size until the
/// residual drops below `tol`.
pub fn reference_equilibrium(
    market: &MarketInstance<f64>,
    tol: f64,
) -> Result<EquilibriumCertificate, MarketError> {
    let lambda =
        max_safe_lambda(market.class(), market.e_factor()).expect("E >= 1 by construction") / 4.0;
    let mut p = reference_start(market);
    let tol_p = zero_price_thresholds(&p);
    let mut best_phi = market.potential(&p)?;
    let mut iterations = 0;
    let mut residual = equilibrium_residual(market, &p, &tol_p, ResidualMode::Market)?;
    while residual >= tol && iterations < MAX_ITERATIONS {
        let z = market.excess_demand(&p)?;
        p = sync_step(&p, &z, lambda).expect("lambda < 1 and z >= -1");
        iterations += 1;
        residual = equilibrium_residual(market, &p, &tol_p, ResidualMode::Market)?;
        best_phi = best_phi.min(market.potential(&p)?);
    }
    let converged = residual < tol;
    if market.class() == crate::market::MarketClass::Leontief {
        let mut q = p.clone();
        for _ in 0..REFINE_ITERATIONS {
            let z = market.excess_demand(&q)?;
            q = sync_step(&q, &z, lambda / 16.0).expect("lambda < 1 and z >= -1");
            best_phi = best_phi.min(market.potential(&q)?);
        }
    }
    Ok(EquilibriumCertificate {
        p_star: p,
        residual,
        tolerance: tol,
        iterations,
        method: if converged {
            "sync_tatonnement"
        } else {
            "unconverged"
        },
        phi_star: best_phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Buyer, UtilitySpec};

    fn one(u: UtilitySpec<f64>) -> MarketInstance<f64> {
        MarketInstance::new(2, vec![Buyer::new(1.0, u)]).unwrap()
    }

    #[test]
    fn residual_examples() {
        let cd = one(UtilitySpec::CobbDouglas {
            weights: vec![0.5, 0.5],
        });
        let leo = one(UtilitySpec::Leontief {
            coefficients: vec![1.0, 1.0],
        });
        let tol = [1e-6, 1e-6];
        assert!(
            equilibrium_residual(&cd, &[0.5, 0.5], &tol, ResidualMode::Market).unwrap() < 1e-15
        );
        assert!(
            equilibrium_residual(&leo, &[0.3, 0.7], &tol, ResidualMode::Market).unwrap() < 1e-15
        );
        assert_eq!(
            equilibrium_residual(&leo, &[1.0, 1.0], &tol, ResidualMode::Market).unwrap(),
            0.5
        );
    }

    #[test]
    fn tiny_prices_only_count_when_over_demanded() {
        let leo = MarketInstance::new(
            2,
            vec![
                Buyer::new(
                    1.0,
                    UtilitySpec::Leontief {
                        coefficients: vec![1.0, 0.0],
                    },
                ),
                Buyer::new(
                    1.0,
                    UtilitySpec::Leontief {
                        coefficients: vec![1.0, 1.0],
                    },
                ),
            ],
        )
        .unwrap();
        // good 1 is nearly free and under-demanded
        let p = [2.0, 1e-9];
        let tol = [1e-6, 1e-6];
        let market = equilibrium_residual(&leo, &p, &tol, ResidualMode::Market).unwrap();
        let pseudo = equilibrium_residual(&leo, &p, &tol, ResidualMode::Pseudo).unwrap();
        assert!(market < 1e-8 && pseudo < 1e-8);
    }

    #[test]
    fn reference_solutions() {
        let cd = reference_equilibrium(
            &one(UtilitySpec::CobbDouglas {
                weights: vec![0.5, 0.5],
            }),
            1e-10,
        )
        .unwrap();
        assert!(cd.valid());
        assert!((cd.p_star[0] - 0.5).abs() < 1e-9 && (cd.p_star[1] - 0.5).abs() < 1e-9);

        let ces = reference_equilibrium(
            &one(UtilitySpec::Ces {
                rho: -1.0,
                weights: vec![1.0, 1.0],
            }),
            1e-10,
        )
        .unwrap();
        assert!(ces.valid());
        assert!((ces.p_star[0] - 0.5).abs() < 1e-9);

        let leo = reference_equilibrium(
            &one(UtilitySpec::Leontief {
                coefficients: vec![1.0, 1.0],
            }),
            1e-10,
        )
        .unwrap();
        assert!(leo.valid());
        assert!((leo.p_star.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(leo.method, "sync_tatonnement");
    }
}
