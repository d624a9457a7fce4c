//! Fisher market model.
//!
//! `n` divisible goods with unit supply and `m` budget-constrained buyers whose
//! utilities are CES, Cobb-Douglas or Leontief. All demand quantities come from
//! closed forms; CES expressions are evaluated in log-space so that very
//! negative or near-one `rho` stays finite.
//!
//! The potential `phi(p) = sum_k p_k + sum_i e_i ln u_i(p)` (with `u_i` the
//! utility bought by one unit of money) is convex and its gradient is the
//! negated excess demand, which is what makes tatonnement a coordinate descent.

use std::fmt;

use thiserror::Error;

use crate::scalar::{log_sum_exp, Scalar};

/// CES records with `rho` below this are rejected; use the Leontief kind.
pub const MIN_CES_RHO: f64 = -100.0;

/// Allowed deviation of Cobb-Douglas weights from summing to one.
pub const COBB_DOUGLAS_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("market must have at least one good")]
    NoGoods,
    #[error("market must have at least one buyer")]
    NoBuyers,
    #[error("buyers[{buyer}].budget: budget must be positive and finite, got {value}")]
    InvalidBudget { buyer: usize, value: f64 },
    #[error("buyers[{buyer}].utility.{field}: expected {expected} entries, got {got}")]
    WrongLength {
        buyer: usize,
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("buyers[{buyer}].utility.rho: {reason}")]
    InvalidRho { buyer: usize, reason: &'static str },
    #[error("buyers[{buyer}].utility.{field}[{good}]: entries must be finite and non-negative, got {value}")]
    InvalidWeight {
        buyer: usize,
        field: &'static str,
        good: usize,
        value: f64,
    },
    #[error("buyers[{buyer}].utility.{field}: at least one entry must be positive")]
    AllZeroWeights { buyer: usize, field: &'static str },
    #[error("buyers[{buyer}].utility.weights: Cobb-Douglas weights must sum to 1, got {sum}")]
    CobbDouglasSum { buyer: usize, sum: f64 },
    #[error("goods[{good}]: no buyer desires this good")]
    UndesiredGood { good: usize },
    #[error("price vector has {got} entries but the market has {expected} goods")]
    PriceLength { expected: usize, got: usize },
    #[error("prices[{good}]: price must be positive and finite, got {value}")]
    NonPositivePrice { good: usize, value: f64 },
    #[error("buyer index {index} out of range for {count} buyers")]
    BuyerIndex { index: usize, count: usize },
    #[error("good index {index} out of range for {count} goods")]
    GoodIndex { index: usize, count: usize },
    #[error("cross-partial requires two distinct goods, got {0} twice")]
    DiagonalCrossPartial(usize),
    #[error("aggregate demand for good {good} is zero at the reference prices")]
    ZeroDemand { good: usize },
}

/// A buyer's utility function.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilitySpec<T> {
    /// `u(x) = (sum_j a_j x_j^rho)^(1/rho)` with `rho < 1`, `rho != 0`.
    Ces { rho: T, weights: Vec<T> },
    /// `u(x) = prod_j x_j^a_j` with weights summing to one.
    CobbDouglas { weights: Vec<T> },
    /// `u(x) = min_j x_j / c_j` over goods with `c_j > 0`.
    Leontief { coefficients: Vec<T> },
}

impl<T: Scalar> UtilitySpec<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            UtilitySpec::Ces { .. } => "ces",
            UtilitySpec::CobbDouglas { .. } => "cobb_douglas",
            UtilitySpec::Leontief { .. } => "leontief",
        }
    }

    /// Weight or coefficient vector, one entry per good.
    pub fn parameters(&self) -> &[T] {
        match self {
            UtilitySpec::Ces { weights, .. } | UtilitySpec::CobbDouglas { weights } => weights,
            UtilitySpec::Leontief { coefficients } => coefficients,
        }
    }

    fn field_name(&self) -> &'static str {
        match self {
            UtilitySpec::Leontief { .. } => "coefficients",
            _ => "weights",
        }
    }

    /// Elasticity parameter; `None` stands for the Leontief limit `-inf`.
    pub fn rho(&self) -> Option<T> {
        match self {
            UtilitySpec::Ces { rho, .. } => Some(*rho),
            UtilitySpec::CobbDouglas { .. } => Some(T::zero()),
            UtilitySpec::Leontief { .. } => None,
        }
    }

    /// `rho / (rho - 1)`: 0 for Cobb-Douglas, 1 for Leontief.
    pub fn theta(&self) -> T {
        match self {
            UtilitySpec::Ces { rho, .. } => *rho / (*rho - T::one()),
            UtilitySpec::CobbDouglas { .. } => T::zero(),
            UtilitySpec::Leontief { .. } => T::one(),
        }
    }

    pub fn desires(&self, good: usize) -> bool {
        self.parameters()[good] > T::zero()
    }

    /// Direct evaluation of `u(x)` on a bundle.
    pub fn utility(&self, x: &[T]) -> T {
        match self {
            UtilitySpec::Ces { rho, weights } => {
                let sum = weights
                    .iter()
                    .zip(x)
                    .filter(|(a, _)| **a > T::zero())
                    .fold(T::zero(), |acc, (a, xj)| acc + *a * xj.powf(*rho));
                sum.powf(T::one() / *rho)
            }
            UtilitySpec::CobbDouglas { weights } => weights
                .iter()
                .zip(x)
                .filter(|(a, _)| **a > T::zero())
                .fold(T::one(), |acc, (a, xj)| acc * xj.powf(*a)),
            UtilitySpec::Leontief { coefficients } => coefficients
                .iter()
                .zip(x)
                .filter(|(c, _)| **c > T::zero())
                .fold(T::infinity(), |acc, (c, xj)| acc.min(*xj / *c)),
        }
    }

    fn validate(&self, buyer: usize, goods: usize) -> Result<(), MarketError> {
        let field = self.field_name();
        let params = self.parameters();
        if params.len() != goods {
            return Err(MarketError::WrongLength {
                buyer,
                field,
                expected: goods,
                got: params.len(),
            });
        }
        for (good, v) in params.iter().enumerate() {
            if !v.is_finite() || *v < T::zero() {
                return Err(MarketError::InvalidWeight {
                    buyer,
                    field,
                    good,
                    value: v.as_f64(),
                });
            }
        }
        if params.iter().all(|v| *v == T::zero()) {
            return Err(MarketError::AllZeroWeights { buyer, field });
        }
        match self {
            UtilitySpec::Ces { rho, .. } => {
                if !rho.is_finite() {
                    return Err(MarketError::InvalidRho {
                        buyer,
                        reason: "rho must be finite",
                    });
                }
                if *rho >= T::one() {
                    return Err(MarketError::InvalidRho {
                        buyer,
                        reason: "rho must be < 1",
                    });
                }
                if *rho == T::zero() {
                    return Err(MarketError::InvalidRho {
                        buyer,
                        reason: "rho = 0 is Cobb-Douglas; use the cobb_douglas kind",
                    });
                }
                if *rho < T::lit(MIN_CES_RHO) {
                    return Err(MarketError::InvalidRho {
                        buyer,
                        reason: "rho below -100 is not supported; use the leontief kind",
                    });
                }
            }
            UtilitySpec::CobbDouglas { weights } => {
                let sum = weights.iter().fold(T::zero(), |acc, w| acc + *w);
                if (sum - T::one()).abs() > T::lit(COBB_DOUGLAS_SUM_TOLERANCE) {
                    return Err(MarketError::CobbDouglasSum {
                        buyer,
                        sum: sum.as_f64(),
                    });
                }
            }
            UtilitySpec::Leontief { .. } => {}
        }
        Ok(())
    }

    fn cast<U: Scalar>(&self) -> UtilitySpec<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::lit(x.as_f64())).collect();
        match self {
            UtilitySpec::Ces { rho, weights } => UtilitySpec::Ces {
                rho: U::lit(rho.as_f64()),
                weights: conv(weights),
            },
            UtilitySpec::CobbDouglas { weights } => UtilitySpec::CobbDouglas {
                weights: conv(weights),
            },
            UtilitySpec::Leontief { coefficients } => UtilitySpec::Leontief {
                coefficients: conv(coefficients),
            },
        }
    }

    /// Optimal bundle for budget `budget` at prices `p` (no validation).
    fn demand_into(&self, budget: T, p: &[T], out: &mut [T]) {
        match self {
            UtilitySpec::Ces { rho, weights } => {
                let s = T::one() / (T::one() - *rho);
                let theta = *rho / (*rho - T::one());
                let log_den = ces_log_denominator(s, theta, weights, p);
                for ((o, a), pj) in out.iter_mut().zip(weights).zip(p) {
                    *o = if *a > T::zero() {
                        budget * (s * a.ln() - s * pj.ln() - log_den).exp()
                    } else {
                        T::zero()
                    };
                }
            }
            UtilitySpec::CobbDouglas { weights } => {
                for ((o, a), pj) in out.iter_mut().zip(weights).zip(p) {
                    *o = *a * budget / *pj;
                }
            }
            UtilitySpec::Leontief { coefficients } => {
                let cost = dot(coefficients, p);
                for (o, c) in out.iter_mut().zip(coefficients) {
                    *o = *c * budget / cost;
                }
            }
        }
    }

    /// `ln u_hat(p)`, the log of the utility bought with one unit of money.
    fn ln_unit_utility(&self, p: &[T]) -> T {
        match self {
            UtilitySpec::Ces { rho, weights } => {
                let s = T::one() / (T::one() - *rho);
                let theta = *rho / (*rho - T::one());
                let log_den = ces_log_denominator(s, theta, weights, p);
                (T::one() - *rho) / *rho * log_den
            }
            UtilitySpec::CobbDouglas { weights } => weights
                .iter()
                .zip(p)
                .filter(|(a, _)| **a > T::zero())
                .fold(T::zero(), |acc, (a, pj)| acc + *a * (a.ln() - pj.ln())),
            UtilitySpec::Leontief { coefficients } => -dot(coefficients, p).ln(),
        }
    }
}

/// `ln sum_k a_k^s p_k^theta` over goods with positive weight.
fn ces_log_denominator<T: Scalar>(s: T, theta: T, weights: &[T], p: &[T]) -> T {
    log_sum_exp(
        weights
            .iter()
            .zip(p)
            .filter(|(a, _)| **a > T::zero())
            .map(move |(a, pj)| s * a.ln() + theta * pj.ln()),
    )
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Buyer<T> {
    pub budget: T,
    pub utility: UtilitySpec<T>,
}

impl<T> Buyer<T> {
    pub fn new(budget: T, utility: UtilitySpec<T>) -> Self {
        Buyer { budget, utility }
    }
}

/// Market label derived from the signs of the buyers' `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarketClass {
    /// Every buyer has `rho <= 0` (CES, Cobb-Douglas or Leontief).
    Complementary,
    /// Every buyer has `rho >= 0`.
    Substitute,
    /// Both signs present.
    Mixed,
    /// Every buyer is Leontief.
    Leontief,
}

impl MarketClass {
    pub fn as_str(self) -> &'static str {
        match self {
            MarketClass::Complementary => "complementary",
            MarketClass::Substitute => "substitute",
            MarketClass::Mixed => "mixed",
            MarketClass::Leontief => "leontief",
        }
    }

    /// True when demand obeys the tight `[1/r2, 1/r1]` scaling envelope.
    pub fn is_complementary(self) -> bool {
        matches!(self, MarketClass::Complementary | MarketClass::Leontief)
    }
}

impl fmt::Display for MarketClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A validated Fisher market with derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance<T> {
    goods: usize,
    buyers: Vec<Buyer<T>>,
    class: MarketClass,
    rho_max: T,
    theta: T,
    e_factor: T,
}

impl<T: Scalar> MarketInstance<T> {
    pub fn new(goods: usize, buyers: Vec<Buyer<T>>) -> Result<Self, MarketError> {
        if goods == 0 {
            return Err(MarketError::NoGoods);
        }
        if buyers.is_empty() {
            return Err(MarketError::NoBuyers);
        }
        for (i, b) in buyers.iter().enumerate() {
            if !b.budget.is_finite() || b.budget <= T::zero() {
                return Err(MarketError::InvalidBudget {
                    buyer: i,
                    value: b.budget.as_f64(),
                });
            }
            b.utility.validate(i, goods)?;
        }
        if let Some(good) = (0..goods).find(|&j| !buyers.iter().any(|b| b.utility.desires(j))) {
            return Err(MarketError::UndesiredGood { good });
        }

        let rhos: Vec<Option<T>> = buyers.iter().map(|b| b.utility.rho()).collect();
        let class = if rhos.iter().all(Option::is_none) {
            MarketClass::Leontief
        } else if rhos.iter().all(|r| r.is_none_or(|r| r <= T::zero())) {
            MarketClass::Complementary
        } else if rhos.iter().all(|r| r.is_some_and(|r| r >= T::zero())) {
            MarketClass::Substitute
        } else {
            MarketClass::Mixed
        };
        let rho_max = rhos
            .iter()
            .fold(T::neg_infinity(), |acc, r| r.map_or(acc, |r| acc.max(r)));
        let (theta, e_factor) = if rho_max == T::neg_infinity() {
            (T::one(), T::one())
        } else {
            let one_minus = T::one() - rho_max;
            (
                (rho_max / one_minus).max(T::one()),
                (T::one() / one_minus).max(T::one()),
            )
        };

        Ok(MarketInstance {
            goods,
            buyers,
            class,
            rho_max,
            theta,
            e_factor,
        })
    }

    pub fn goods(&self) -> usize {
        self.goods
    }

    pub fn buyers(&self) -> &[Buyer<T>] {
        &self.buyers
    }

    pub fn class(&self) -> MarketClass {
        self.class
    }

    /// Largest buyer `rho`; `-inf` when every buyer is Leontief.
    pub fn rho_max(&self) -> T {
        self.rho_max
    }

    /// `max{rho/(1-rho), 1}`.
    pub fn theta(&self) -> T {
        self.theta
    }

    /// `E = max{1/(1-rho), 1}`.
    pub fn e_factor(&self) -> T {
        self.e_factor
    }

    /// Re-evaluates the same market in another precision.
    pub fn cast<U: Scalar>(&self) -> MarketInstance<U> {
        let buyers = self
            .buyers
            .iter()
            .map(|b| Buyer::new(U::lit(b.budget.as_f64()), b.utility.cast()))
            .collect();
        MarketInstance::new(self.goods, buyers).expect("cast of a valid market stays valid")
    }

    pub fn check_prices(&self, p: &[T]) -> Result<(), MarketError> {
        if p.len() != self.goods {
            return Err(MarketError::PriceLength {
                expected: self.goods,
                got: p.len(),
            });
        }
        match p.iter().position(|v| !v.is_finite() || *v <= T::zero()) {
            Some(good) => Err(MarketError::NonPositivePrice {
                good,
                value: p[good].as_f64(),
            }),
            None => Ok(()),
        }
    }

    fn buyer(&self, index: usize) -> Result<&Buyer<T>, MarketError> {
        self.buyers.get(index).ok_or(MarketError::BuyerIndex {
            index,
            count: self.buyers.len(),
        })
    }

    fn check_good(&self, index: usize) -> Result<(), MarketError> {
        if index < self.goods {
            Ok(())
        } else {
            Err(MarketError::GoodIndex {
                index,
                count: self.goods,
            })
        }
    }

    /// Utility-maximizing bundle of one buyer.
    pub fn demand(&self, buyer: usize, p: &[T]) -> Result<Vec<T>, MarketError> {
        self.check_prices(p)?;
        let b = self.buyer(buyer)?;
        let mut x = vec![T::zero(); self.goods];
        b.utility.demand_into(b.budget, p, &mut x);
        Ok(x)
    }

    /// Per-buyer demands and the excess demand vector.
    pub fn demand_profile(&self, p: &[T]) -> Result<DemandProfile<T>, MarketError> {
        self.check_prices(p)?;
        let x: Vec<Vec<T>> = self
            .buyers
            .iter()
            .map(|b| {
                let mut row = vec![T::zero(); self.goods];
                b.utility.demand_into(b.budget, p, &mut row);
                row
            })
            .collect();
        let z = (0..self.goods)
            .map(|j| x.iter().fold(T::zero(), |acc, row| acc + row[j]) - T::one())
            .collect();
        Ok(DemandProfile { x, z })
    }

    /// Total demand per good, summed over buyers in index order.
    pub fn aggregate_demand(&self, p: &[T]) -> Result<Vec<T>, MarketError> {
        self.check_prices(p)?;
        let mut total = vec![T::zero(); self.goods];
        let mut row = vec![T::zero(); self.goods];
        for b in &self.buyers {
            b.utility.demand_into(b.budget, p, &mut row);
            for (t, x) in total.iter_mut().zip(&row) {
                *t = *t + *x;
            }
        }
        Ok(total)
    }

    /// `z_j = sum_i x_ij - 1`.
    pub fn excess_demand(&self, p: &[T]) -> Result<Vec<T>, MarketError> {
        Ok(self
            .aggregate_demand(p)?
            .into_iter()
            .map(|x| x - T::one())
            .collect())
    }

    /// Utility a buyer obtains from one unit of money at prices `p`.
    pub fn unit_utility(&self, buyer: usize, p: &[T]) -> Result<T, MarketError> {
        self.check_prices(p)?;
        Ok(self.buyer(buyer)?.utility.ln_unit_utility(p).exp())
    }

    /// `phi(p) = sum_k p_k + sum_i e_i ln u_hat_i(p)`.
    pub fn potential(&self, p: &[T]) -> Result<T, MarketError> {
        self.check_prices(p)?;
        let spend = p.iter().fold(T::zero(), |acc, v| acc + *v);
        Ok(self.buyers.iter().fold(spend, |acc, b| {
            acc + b.budget * b.utility.ln_unit_utility(p)
        }))
    }

    /// Gradient of the potential, which equals `-z(p)`.
    pub fn potential_gradient(&self, p: &[T]) -> Result<Vec<T>, MarketError> {
        Ok(self.excess_demand(p)?.into_iter().map(|z| -z).collect())
    }

    /// Off-diagonal Hessian entry of the potential:
    /// `sum_i theta_i x_ij x_ik / e_i`.
    pub fn hessian_cross(&self, p: &[T], j: usize, k: usize) -> Result<T, MarketError> {
        self.check_prices(p)?;
        self.check_good(j)?;
        self.check_good(k)?;
        if j == k {
            return Err(MarketError::DiagonalCrossPartial(j));
        }
        let mut row = vec![T::zero(); self.goods];
        Ok(self.buyers.iter().fold(T::zero(), |acc, b| {
            b.utility.demand_into(b.budget, p, &mut row);
            acc + b.utility.theta() * row[j] * row[k] / b.budget
        }))
    }

    /// Checks how aggregate demand moves when prices go from `p` to `p_prime`.
    ///
    /// With `r1 = min p'/p` and `r2 = max p'/p`, complementary markets keep
    /// every ratio `x(p')/x(p)` inside `[1/r2, 1/r1]`; general CES markets inside
    /// `[r^-(2E-1), r^(2E-1)]` with `r = max{r2, 1/r1}`.
    pub fn demand_scaling_envelope(
        &self,
        p: &[T],
        p_prime: &[T],
    ) -> Result<ScalingEnvelope<T>, MarketError> {
        let base = self.aggregate_demand(p)?;
        let moved = self.aggregate_demand(p_prime)?;
        if let Some(good) = base.iter().position(|x| *x <= T::zero()) {
            return Err(MarketError::ZeroDemand { good });
        }
        let price_ratios = p_prime.iter().zip(p).map(|(a, b)| *a / *b);
        let r_min = price_ratios.clone().fold(T::infinity(), T::min);
        let r_max = price_ratios.fold(T::neg_infinity(), T::max);
        let (lower, upper) = if self.class.is_complementary() {
            (T::one() / r_max, T::one() / r_min)
        } else {
            let r = r_max.max(T::one() / r_min);
            let power = T::lit(2.0) * self.e_factor - T::one();
            (r.powf(-power), r.powf(power))
        };
        let ratios: Vec<T> = moved.iter().zip(&base).map(|(a, b)| *a / *b).collect();
        let slack = T::lit(1e-12);
        let pass = ratios
            .iter()
            .all(|q| *q >= lower * (T::one() - slack) && *q <= upper * (T::one() + slack));
        Ok(ScalingEnvelope {
            r_min,
            r_max,
            lower,
            upper,
            ratios,
            pass,
        })
    }
}

/// Outcome of [`MarketInstance::demand_scaling_envelope`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingEnvelope<T> {
    pub r_min: T,
    pub r_max: T,
    pub lower: T,
    pub upper: T,
    /// `x_l(p') / x_l(p)` per good.
    pub ratios: Vec<T>,
    pub pass: bool,
}

/// Demand of every buyer at one price vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandProfile<T> {
    /// `x[i][j]`: units of good `j` bought by buyer `i`.
    pub x: Vec<Vec<T>>,
    /// Aggregate excess demand per good.
    pub z: Vec<T>,
}

/// Strictly positive prices stamped with a simulation time.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceVector<T> {
    values: Vec<T>,
    time: T,
}

impl<T: Scalar> PriceVector<T> {
    pub fn new(values: Vec<T>, time: T) -> Result<Self, MarketError> {
        if let Some(good) = values
            .iter()
            .position(|v| !v.is_finite() || *v <= T::zero())
        {
            return Err(MarketError::NonPositivePrice {
                good,
                value: values[good].as_f64(),
            });
        }
        Ok(PriceVector { values, time })
    }

    pub fn at_zero(values: Vec<T>) -> Result<Self, MarketError> {
        Self::new(values, T::zero())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

impl<T> AsRef<[T]> for PriceVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.values
    }
}

/// Central-difference step used for validating derivatives at price `p_j`.
pub fn fd_step(p_j: f64) -> f64 {
    1e-6f64.max(1e-6 * p_j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single(goods: usize, utility: UtilitySpec<f64>) -> MarketInstance<f64> {
        MarketInstance::new(goods, vec![Buyer::new(1.0, utility)]).unwrap()
    }

    fn cobb_douglas() -> MarketInstance<f64> {
        single(
            2,
            UtilitySpec::CobbDouglas {
                weights: vec![0.5, 0.5],
            },
        )
    }

    fn leontief() -> MarketInstance<f64> {
        single(
            2,
            UtilitySpec::Leontief {
                coefficients: vec![1.0, 1.0],
            },
        )
    }

    fn ces_minus_one() -> MarketInstance<f64> {
        single(
            2,
            UtilitySpec::Ces {
                rho: -1.0,
                weights: vec![1.0, 1.0],
            },
        )
    }

    // Expected bundles below were confirmed against the budget-constrained
    // maximization oracle in tests/demand_oracle.rs.
    #[test]
    fn demand_examples() {
        let x = cobb_douglas().demand(0, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(x[0], 0.5, max_relative = 1e-14);
        assert_relative_eq!(x[1], 0.5, max_relative = 1e-14);

        let x = leontief().demand(0, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(x[0], 0.5, max_relative = 1e-14);
        assert_relative_eq!(x[1], 0.5, max_relative = 1e-14);

        let x = ces_minus_one().demand(0, &[1.0, 4.0]).unwrap();
        assert_relative_eq!(x[0], 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(x[1], 1.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn excess_demand_examples() {
        let z = cobb_douglas().excess_demand(&[0.5, 0.5]).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-15));
        let z = leontief().excess_demand(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(z[0], -0.5, max_relative = 1e-14);
        assert_relative_eq!(z[1], -0.5, max_relative = 1e-14);
        let z = ces_minus_one().excess_demand(&[1.0, 4.0]).unwrap();
        assert_relative_eq!(z[0], -2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(z[1], -5.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn unit_utility_examples() {
        assert_relative_eq!(
            cobb_douglas().unit_utility(0, &[0.5, 0.5]).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            ces_minus_one().unit_utility(0, &[1.0, 4.0]).unwrap(),
            1.0 / 9.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            leontief().unit_utility(0, &[1.0, 1.0]).unwrap(),
            0.5,
            max_relative = 1e-14
        );
    }

    #[test]
    fn unit_utility_is_utility_of_unit_budget_bundle() {
        let m = single(
            3,
            UtilitySpec::Ces {
                rho: 0.4,
                weights: vec![0.2, 1.0, 3.0],
            },
        );
        let p = [0.7, 1.3, 2.0];
        let x: Vec<f64> = m.demand(0, &p).unwrap();
        let direct = m.buyers()[0].utility.utility(&x);
        assert_relative_eq!(direct, m.unit_utility(0, &p).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn potential_examples() {
        assert_relative_eq!(
            cobb_douglas().potential(&[0.5, 0.5]).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            leontief().potential(&[1.0, 1.0]).unwrap(),
            2.0 - 2f64.ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            ces_minus_one().potential(&[1.0, 4.0]).unwrap(),
            5.0 - 2.0 * 3f64.ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(5.0 - 2.0 * 3f64.ln(), 2.802775, epsilon = 1e-6);
    }

    #[test]
    fn gradient_examples() {
        let g = cobb_douglas().potential_gradient(&[0.5, 0.5]).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
        let g = leontief().potential_gradient(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(g[0], 0.5, max_relative = 1e-14);
        let g = ces_minus_one().potential_gradient(&[1.0, 4.0]).unwrap();
        assert_relative_eq!(g[0], 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(g[1], 5.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn hessian_cross_examples() {
        assert_eq!(
            cobb_douglas().hessian_cross(&[0.3, 2.0], 0, 1).unwrap(),
            0.0
        );
        assert_relative_eq!(
            ces_minus_one().hessian_cross(&[1.0, 4.0], 0, 1).unwrap(),
            1.0 / 36.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            leontief().hessian_cross(&[1.0, 1.0], 0, 1).unwrap(),
            0.25,
            max_relative = 1e-14
        );
        assert_eq!(
            leontief().hessian_cross(&[1.0, 1.0], 1, 1),
            Err(MarketError::DiagonalCrossPartial(1))
        );
    }

    #[test]
    fn scaling_envelope_examples() {
        let m = leontief();
        let same = m.demand_scaling_envelope(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(same.pass);
        assert_eq!((same.lower, same.upper), (1.0, 1.0));

        let doubled = m.demand_scaling_envelope(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert!(doubled.pass);
        assert!(doubled.ratios.iter().all(|r| *r == 0.5));

        let subs = single(
            2,
            UtilitySpec::Ces {
                rho: 0.5,
                weights: vec![1.0, 1.0],
            },
        );
        assert_eq!(subs.e_factor(), 2.0);
        let env = subs
            .demand_scaling_envelope(&[1.0, 1.0], &[1.2, 0.9])
            .unwrap();
        assert!(env.pass);
        assert_relative_eq!(env.upper, 1.2f64.powi(3), max_relative = 1e-14);
        assert_relative_eq!(env.lower, 1.2f64.powi(-3), max_relative = 1e-14);
    }

    #[test]
    fn non_positive_price_is_a_domain_error() {
        let m = leontief();
        assert_eq!(
            m.demand(0, &[1.0, 0.0]),
            Err(MarketError::NonPositivePrice {
                good: 1,
                value: 0.0
            })
        );
        assert!(m.potential(&[-1.0, 1.0]).is_err());
        assert!(m.excess_demand(&[1.0]).is_err());
    }

    #[test]
    fn construction_rejects_bad_records() {
        let ces = |rho: f64| {
            vec![Buyer::new(
                1.0,
                UtilitySpec::Ces {
                    rho,
                    weights: vec![1.0, 1.0],
                },
            )]
        };
        assert!(matches!(
            MarketInstance::new(2, ces(1.0)),
            Err(MarketError::InvalidRho {
                reason: "rho must be < 1",
                ..
            })
        ));
        assert!(matches!(
            MarketInstance::new(2, ces(0.0)),
            Err(MarketError::InvalidRho { .. })
        ));
        assert!(matches!(
            MarketInstance::new(2, ces(-150.0)),
            Err(MarketError::InvalidRho { .. })
        ));
        assert!(MarketInstance::new(2, ces(-100.0)).is_ok());

        let unwanted = vec![Buyer::new(
            1.0,
            UtilitySpec::Leontief {
                coefficients: vec![1.0, 0.0],
            },
        )];
        assert_eq!(
            MarketInstance::new(2, unwanted),
            Err(MarketError::UndesiredGood { good: 1 })
        );

        let broke = vec![Buyer::new(
            0.0,
            UtilitySpec::Leontief {
                coefficients: vec![1.0, 1.0],
            },
        )];
        assert!(matches!(
            MarketInstance::new(2, broke),
            Err(MarketError::InvalidBudget { .. })
        ));

        let cd = vec![Buyer::new(
            1.0,
            UtilitySpec::CobbDouglas {
                weights: vec![0.5, 0.6],
            },
        )];
        assert!(matches!(
            MarketInstance::new(2, cd),
            Err(MarketError::CobbDouglasSum { .. })
        ));

        let zero = vec![Buyer::new(
            1.0,
            UtilitySpec::CobbDouglas {
                weights: vec![0.0, 0.0],
            },
        )];
        assert!(matches!(
            MarketInstance::new(2, zero),
            Err(MarketError::AllZeroWeights { .. })
        ));

        let short = vec![Buyer::new(
            1.0,
            UtilitySpec::Leontief {
                coefficients: vec![1.0],
            },
        )];
        assert!(matches!(
            MarketInstance::new(2, short),
            Err(MarketError::WrongLength { .. })
        ));
    }

    #[test]
    fn class_and_constants() {
        let cd = cobb_douglas();
        assert_eq!(cd.class(), MarketClass::Complementary);
        assert_eq!(cd.e_factor(), 1.0);
        assert_eq!(leontief().class(), MarketClass::Leontief);
        assert_eq!(leontief().theta(), 1.0);

        let mixed = MarketInstance::new(
            2,
            vec![
                Buyer::new(
                    1.0,
                    UtilitySpec::Ces {
                        rho: -2.0,
                        weights: vec![1.0, 1.0],
                    },
                ),
                Buyer::new(
                    1.0,
                    UtilitySpec::Ces {
                        rho: 0.5,
                        weights: vec![1.0, 2.0],
                    },
                ),
            ],
        )
        .unwrap();
        assert_eq!(mixed.class(), MarketClass::Mixed);
        assert_eq!(mixed.e_factor(), 2.0);
        assert_eq!(mixed.theta(), 1.0);

        let subs = single(
            2,
            UtilitySpec::Ces {
                rho: 0.75,
                weights: vec![1.0, 1.0],
            },
        );
        assert_eq!(subs.class(), MarketClass::Substitute);
        assert_eq!(subs.theta(), 3.0);
        assert_eq!(subs.e_factor(), 4.0);
    }

    #[test]
    fn zero_weight_goods_get_zero_demand() {
        let m = MarketInstance::new(
            3,
            vec![
                Buyer::new(
                    2.0,
                    UtilitySpec::Ces {
                        rho: -3.0,
                        weights: vec![1.0, 0.0, 2.0],
                    },
                ),
                Buyer::new(
                    1.0,
                    UtilitySpec::CobbDouglas {
                        weights: vec![0.0, 1.0, 0.0],
                    },
                ),
            ],
        )
        .unwrap();
        let x = m.demand(0, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(x[1], 0.0);
        let spent: f64 = x.iter().zip([1.0, 1.0, 1.0]).map(|(a, b)| a * b).sum();
        assert_relative_eq!(spent, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn single_precision_matches_double() {
        let m64 = ces_minus_one();
        let m32: MarketInstance<f32> = m64.cast();
        let x = m32.demand(0, &[1.0, 4.0]).unwrap();
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-6);
        assert!((x[1] - 1.0 / 6.0).abs() < 1e-6);
        let phi = m32.potential(&[1.0, 4.0]).unwrap();
        assert!((phi as f64 - (5.0 - 2.0 * 3f64.ln())).abs() < 1e-5);
    }

    #[test]
    fn price_vector_rejects_zero() {
        assert!(PriceVector::at_zero(vec![1.0, 0.0]).is_err());
        let p = PriceVector::new(vec![1.0, 2.0], 3.5).unwrap();
        assert_eq!(p.time(), 3.5);
        assert_eq!(p.values(), &[1.0, 2.0]);
    }
}
