use serde::{Deserialize, Serialize};

use super::{FormatError, SCHEMA_VERSION};
use crate::market::{Buyer, MarketError, MarketInstance, UtilitySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub schema_version: u32,
    pub goods: usize,
    pub buyers: Vec<BuyerRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuyerRecord {
    pub budget: f64,
    pub utility: UtilityRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilityRecord {
    Ces { rho: f64, weights: Vec<f64> },
    CobbDouglas { weights: Vec<f64> },
    Leontief { coefficients: Vec<f64> },
}

impl From<&UtilitySpec<f64>> for UtilityRecord {
    fn from(u: &UtilitySpec<f64>) -> Self {
        match u {
            UtilitySpec::Ces { rho, weights } => UtilityRecord::Ces {
                rho: *rho,
                weights: weights.clone(),
            },
            UtilitySpec::CobbDouglas { weights } => UtilityRecord::CobbDouglas {
                weights: weights.clone(),
            },
            UtilitySpec::Leontief { coefficients } => UtilityRecord::Leontief {
                coefficients: coefficients.clone(),
            },
        }
    }
}

impl From<UtilityRecord> for UtilitySpec<f64> {
    fn from(u: UtilityRecord) -> Self {
        match u {
            UtilityRecord::Ces { rho, weights } => UtilitySpec::Ces { rho, weights },
            UtilityRecord::CobbDouglas { weights } => UtilitySpec::CobbDouglas { weights },
            UtilityRecord::Leontief { coefficients } => UtilitySpec::Leontief { coefficients },
        }
    }
}

impl MarketFile {
    pub fn from_market(market: &MarketInstance<f64>) -> Self {
        MarketFile {
            schema_version: SCHEMA_VERSION,
            goods: market.goods(),
            buyers: market
                .buyers()
                .iter()
                .map(|b| BuyerRecord {
                    budget: b.budget,
                    utility: (&b.utility).into(),
                })
                .collect(),
        }
    }

    pub fn into_market(self) -> Result<MarketInstance<f64>, FormatError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(FormatError::Version(self.schema_version));
        }
        let buyers = self
            .buyers
            .into_iter()
            .map(|b| Buyer::new(b.budget, b.utility.into()))
            .collect();
        MarketInstance::new(self.goods, buyers).map_err(market_error)
    }
}

fn market_error(e: MarketError) -> FormatError {
    // MarketError messages already lead with the field path
    match e {
        MarketError::NoGoods => FormatError::Field {
            path: "goods".into(),
            message: e.to_string(),
        },
        MarketError::NoBuyers => FormatError::Field {
            path: "buyers".into(),
            message: e.to_string(),
        },
        other => FormatError::Invalid(other.to_string()),
    }
}

pub fn market_from_str(text: &str) -> Result<MarketInstance<f64>, FormatError> {
    let file: MarketFile = serde_json::from_str(text)?;
    file.into_market()
}

pub fn market_to_string(market: &MarketInstance<f64>) -> String {
    let mut s =
        serde_json::to_string_pretty(&MarketFile::from_market(market)).expect("market serializes");
    s.push('\n');
    s
}
