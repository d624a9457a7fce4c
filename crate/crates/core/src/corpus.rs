//! Built-in markets and scenarios used by the test suites and the CLI.
//!
//! Every scenario runs at the largest strict step size of its market. Seeds
//! drive the timing and staleness streams and, for round-robin timing, the
//! phase offsets.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use std::path::PathBuf;

use crate::dynamics::{max_safe_lambda, LambdaMode};
use crate::io::{ScenarioFile, TimingRecord};
use crate::market::{Buyer, MarketClass, MarketInstance, UtilitySpec};
use crate::scheduler::{ScenarioConfig, StalenessModel, TimingModel};

pub const SEEDS: [u64; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

pub const MARKET_NAMES: [&str; 5] = [
    "ces_comp_2",
    "ces_comp_3",
    "ces_mixed_3",
    "leontief_2",
    "leontief_3",
];

pub const TIMINGS: [&str; 3] = ["round_robin", "poisson_clipped", "jittered_fixed"];

pub const STALENESS: [StalenessModel; 3] = [
    StalenessModel::Endpoint,
    StalenessModel::TimeWeightedAverage,
    StalenessModel::AdversarialMaxGap,
];

/// Environment variable naming the corpus directory.
pub const CORPUS_ENV: &str = "TATONNEMENT_CORPUS";

/// `$TATONNEMENT_CORPUS`, or the `corpus/` directory of this source tree.
pub fn corpus_dir() -> PathBuf {
    std::env::var_os(CORPUS_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus")))
}

pub fn market_path(name: &str) -> PathBuf {
    corpus_dir().join("markets").join(format!("{name}.json"))
}

pub fn scenario_path(name: &str) -> PathBuf {
    corpus_dir().join("scenarios").join(format!("{name}.json"))
}

/// Stream reserved for drawing round-robin offsets; goods use streams `0..2n`.
const OFFSET_STREAM: u64 = u64::MAX;
const FANOUT_SEED_STREAM: u64 = u64::MAX - 1;

fn ces(budget: f64, rho: f64, weights: &[f64]) -> Buyer<f64> {
    Buyer::new(
        budget,
        UtilitySpec::Ces {
            rho,
            weights: weights.to_vec(),
        },
    )
}

fn leontief(budget: f64, coefficients: &[f64]) -> Buyer<f64> {
    Buyer::new(
        budget,
        UtilitySpec::Leontief {
            coefficients: coefficients.to_vec(),
        },
    )
}

pub fn market(name: &str) -> Option<MarketInstance<f64>> {
    let buyers = match name {
        "ces_comp_2" => vec![ces(1.0, -0.25, &[1.0, 2.0]), ces(1.5, -0.5, &[2.0, 1.0])],
        "ces_comp_3" => vec![
            ces(1.0, -0.2, &[1.0, 1.0, 0.5]),
            ces(2.0, -0.5, &[0.3, 1.0, 1.0]),
            ces(0.8, -0.1, &[1.0, 0.2, 0.7]),
        ],
        "ces_mixed_3" => vec![
            ces(1.0, -2.0, &[1.0, 1.0, 1.0]),
            ces(1.0, 0.5, &[1.0, 2.0, 0.5]),
            Buyer::new(
                0.5,
                UtilitySpec::CobbDouglas {
                    weights: vec![0.2, 0.3, 0.5],
                },
            ),
        ],
        "leontief_2" => vec![leontief(1.0, &[1.0, 2.0]), leontief(1.0, &[2.0, 1.0])],
        "leontief_3" => vec![
            leontief(1.0, &[1.0, 0.5, 0.2]),
            leontief(2.0, &[0.2, 1.0, 0.6]),
            leontief(1.5, &[0.7, 0.3, 1.0]),
        ],
        _ => return None,
    };
    let goods = buyers[0].utility.parameters().len();
    Some(MarketInstance::new(goods, buyers).expect("corpus markets are valid"))
}

/// Start away from equilibrium: the even split of total budget, scaled
/// per good.
pub fn initial_prices(market: &MarketInstance<f64>) -> Vec<f64> {
    const SCALE: [f64; 3] = [0.4, 2.0, 1.1];
    let money: f64 = market.buyers().iter().map(|b| b.budget).sum();
    let even = money / market.goods() as f64;
    (0..market.goods())
        .map(|j| even * SCALE[j % SCALE.len()])
        .collect()
}

/// Horizon long enough for the market's convergence targets.
pub fn horizon(class: MarketClass) -> f64 {
    match class {
        MarketClass::Leontief => 2000.0,
        _ => 500.0,
    }
}

pub fn strict_lambda(market: &MarketInstance<f64>) -> f64 {
    max_safe_lambda(market.class(), market.e_factor()).expect("E >= 1 by construction")
}

/// Round-robin phase offsets drawn uniformly from `[0, period)`.
pub fn draw_offsets(seed: u64, goods: usize, period: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(OFFSET_STREAM);
    (0..goods).map(|_| rng.random::<f64>() * period).collect()
}

/// Independent seed number `index` derived from `base`, for runs that fan
/// out from one user-supplied seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(FANOUT_SEED_STREAM);
    rng.set_word_pos(u128::from(index) * 2);
    rng.next_u64()
}

pub fn timing(name: &str, goods: usize, seed: u64) -> Option<TimingModel> {
    Some(match name {
        "round_robin" => TimingModel::RoundRobin {
            period: 1.0,
            offsets: draw_offsets(seed, goods, 1.0),
        },
        "poisson_clipped" => TimingModel::PoissonClipped {
            rates: vec![1.5; goods],
        },
        "jittered_fixed" => TimingModel::JitteredFixed {
            period: 0.8,
            jitter: 0.2,
        },
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusScenario {
    pub market: &'static str,
    pub timing: &'static str,
    pub staleness: StalenessModel,
}

impl CorpusScenario {
    pub fn name(&self) -> String {
        format!(
            "{}__{}__{}",
            self.market,
            self.timing,
            self.staleness.name()
        )
    }

    pub fn market(&self) -> MarketInstance<f64> {
        market(self.market).expect("corpus market names are valid")
    }

    pub fn config(&self, seed: u64) -> ScenarioConfig {
        let m = self.market();
        let n = m.goods();
        ScenarioConfig::new(
            timing(self.timing, n, seed).expect("corpus timing names are valid"),
            self.staleness,
            strict_lambda(&m),
            horizon(m.class()),
            initial_prices(&m),
        )
        .with_seed(seed)
        .with_lambda_mode(LambdaMode::Strict)
    }

    /// The scenario as a file: no seed, and round-robin phases left to be
    /// drawn from whatever seed the run is given.
    pub fn file(&self) -> ScenarioFile {
        let mut f = ScenarioFile::from_config(&self.config(0));
        f.seed = None;
        if let TimingRecord::RoundRobin { offsets, .. } = &mut f.timing {
            *offsets = None;
        }
        f
    }
}

/// Every market crossed with every timing and staleness model.
pub fn scenarios() -> Vec<CorpusScenario> {
    let mut out = Vec::new();
    for m in MARKET_NAMES {
        for t in TIMINGS {
            for s in STALENESS {
                out.push(CorpusScenario {
                    market: m,
                    timing: t,
                    staleness: s,
                });
            }
        }
    }
    out
}
