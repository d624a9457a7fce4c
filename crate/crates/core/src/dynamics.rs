//! Tatonnement price-update rules and the step-size constants that go with them.
//!
//! The synchronous rule moves every price at once,
//! `p_j <- p_j (1 + lambda min{z_j, 1})`. The asynchronous rule moves a single
//! good using an observed excess demand `z_tilde` and the time `dt` since that
//! good's previous update, `p <- p (1 + lambda min{z_tilde, 1} dt)`. Writing
//! `gamma = max{1, z_tilde} / (lambda p)` turns the latter into the additive
//! coordinate step `p + z_tilde dt / gamma`.

use thiserror::Error;

use crate::market::MarketClass;
use crate::scalar::Scalar;

/// Safe step-size constant for complementary-CES and Leontief markets.
pub const COMPLEMENTARY_LAMBDA: f64 = 1.0 / 25.5;

/// Slack allowed on the `dt <= 1` contract for accumulated clock rounding.
pub const GAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("lambda must lie in (0, 1), got {0}")]
    LambdaOutOfRange(f64),
    #[error("lambda {lambda} exceeds the strict bound {bound}")]
    LambdaAboveBound { lambda: f64, bound: f64 },
    #[error("excess demand {0} is below -1")]
    ExcessBelowMinusOne(f64),
    #[error("elapsed time {0} exceeds one time unit")]
    GapTooLong(f64),
    #[error("elapsed time {0} must be positive")]
    NonPositiveGap(f64),
    #[error("price {0} must be positive and finite")]
    NonPositivePrice(f64),
    #[error("E must be at least 1, got {0}")]
    EBelowOne(f64),
    #[error("price and excess demand vectors differ in length ({prices} vs {excess})")]
    LengthMismatch { prices: usize, excess: usize },
}

/// Whether `lambda` is held to the safe bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LambdaMode {
    #[default]
    Strict,
    /// Any `0 < lambda < 1`; used for divergence experiments.
    Exploratory,
}

impl LambdaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LambdaMode::Strict => "strict",
            LambdaMode::Exploratory => "exploratory",
        }
    }
}

/// A validated step-size constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams<T> {
    lambda: T,
    class: MarketClass,
    mode: LambdaMode,
}

impl<T: Scalar> StepParams<T> {
    pub fn new(
        lambda: T,
        class: MarketClass,
        e_factor: T,
        mode: LambdaMode,
    ) -> Result<Self, StepError> {
        check_lambda(lambda)?;
        if mode == LambdaMode::Strict {
            let bound = max_safe_lambda(class, e_factor)?;
            if lambda > bound {
                return Err(StepError::LambdaAboveBound {
                    lambda: lambda.as_f64(),
                    bound: bound.as_f64(),
                });
            }
        }
        Ok(StepParams {
            lambda,
            class,
            mode,
        })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn class(&self) -> MarketClass {
        self.class
    }

    pub fn mode(&self) -> LambdaMode {
        self.mode
    }
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<(), StepError> {
    if !(lambda > T::zero() && lambda < T::one()) {
        return Err(StepError::LambdaOutOfRange(lambda.as_f64()));
    }
    Ok(())
}

/// Quantities of one asynchronous update, recorded from the `z_tilde`
/// actually used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRecord<T> {
    /// `max{1, z_tilde} / (lambda p_before)`.
    pub gamma: T,
    pub z_tilde: T,
    pub p_before: T,
    pub dt: T,
}

impl<T: Scalar> GammaRecord<T> {
    /// The same update written additively: `p_before + z_tilde dt / gamma`.
    pub fn additive_update(&self) -> T {
        self.p_before + self.z_tilde * self.dt / self.gamma
    }
}

/// One synchronous step on every price.
pub fn sync_step<T: Scalar>(p: &[T], z: &[T], lambda: T) -> Result<Vec<T>, StepError> {
    check_lambda(lambda)?;
    if p.len() != z.len() {
        return Err(StepError::LengthMismatch {
            prices: p.len(),
            excess: z.len(),
        });
    }
    p.iter()
        .zip(z)
        .map(|(pj, zj)| {
            check_price(*pj)?;
            check_excess(*zj)?;
            Ok(*pj * (T::one() + lambda * zj.min(T::one())))
        })
        .collect()
}

/// One asynchronous update of a single price.
pub fn async_step<T: Scalar>(
    p_before: T,
    z_tilde: T,
    lambda: T,
    dt: T,
) -> Result<(T, GammaRecord<T>), StepError> {
    check_lambda(lambda)?;
    check_price(p_before)?;
    check_excess(z_tilde)?;
    if !(dt > T::zero()) {
        return Err(StepError::NonPositiveGap(dt.as_f64()));
    }
    if dt > T::one() + T::lit(GAP_TOLERANCE) {
        return Err(StepError::GapTooLong(dt.as_f64()));
    }
    let p_after = p_before * (T::one() + lambda * z_tilde.min(T::one()) * dt);
    let gamma = z_tilde.max(T::one()) / (lambda * p_before);
    Ok((
        p_after,
        GammaRecord {
            gamma,
            z_tilde,
            p_before,
            dt,
        },
    ))
}

fn check_price<T: Scalar>(p: T) -> Result<(), StepError> {
    if p.is_finite() && p > T::zero() {
        Ok(())
    } else {
        Err(StepError::NonPositivePrice(p.as_f64()))
    }
}

fn check_excess<T: Scalar>(z: T) -> Result<(), StepError> {
    if z >= -T::one() {
        Ok(())
    } else {
        Err(StepError::ExcessBelowMinusOne(z.as_f64()))
    }
}

/// Largest `lambda` covered by the convergence guarantees: `1/25.5` for
/// complementary and Leontief markets, `1/(26E)` otherwise.
pub fn max_safe_lambda<T: Scalar>(class: MarketClass, e_factor: T) -> Result<T, StepError> {
    if !(e_factor >= T::one()) {
        return Err(StepError::EBelowOne(e_factor.as_f64()));
    }
    Ok(match class {
        MarketClass::Complementary | MarketClass::Leontief => T::lit(COMPLEMENTARY_LAMBDA),
        MarketClass::Substitute | MarketClass::Mixed => T::one() / (T::lit(26.0) * e_factor),
    })
}

/// `4 sqrt(21) lambda theta exp(8 E lambda (lambda + 1))`; the step size is
/// admissible when this is at most one. Complementary markets use
/// `theta = E = 1`.
pub fn step_condition<T: Scalar>(lambda: T, theta: T, e_factor: T) -> T {
    let four_root21 = T::lit(4.0) * T::lit(21.0).sqrt();
    four_root21 * lambda * theta * (T::lit(8.0) * e_factor * lambda * (lambda + T::one())).exp()
}

/// Amortization constants `c1`, `c2`, `c3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConstants<T> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
}

/// `c1 = (2/sqrt 21) exp(2 lambda (lambda + 1))`, `c2 = 1/4`, `c3 = 21 c1 / 8`.
pub fn analysis_constants<T: Scalar>(lambda: T) -> AnalysisConstants<T> {
    let c1 = T::lit(2.0) / T::lit(21.0).sqrt() * (T::lit(2.0) * lambda * (lambda + T::one())).exp();
    AnalysisConstants {
        c1,
        c2: T::lit(0.25),
        c3: T::lit(21.0) * c1 / T::lit(8.0),
    }
}
