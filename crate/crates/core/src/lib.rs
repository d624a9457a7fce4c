//! Asynchronous tatonnement in Fisher markets with CES, Cobb-Douglas and
//! Leontief buyers: market model, update rules, a discrete-event simulator,
//! potential-based checkers and file formats.

pub mod analysis;
pub mod corpus;
pub mod dynamics;
pub mod io;
pub mod market;
pub mod scalar;
pub mod scheduler;

pub use scalar::Scalar;

pub type Market = market::MarketInstance<f64>;
pub type Market32 = market::MarketInstance<f32>;
pub type Utility = market::UtilitySpec<f64>;
pub type Prices = market::PriceVector<f64>;
