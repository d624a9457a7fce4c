use tatonnement::corpus::{self, CorpusScenario};
use tatonnement::dynamics::GAP_TOLERANCE;
use tatonnement::market::{Buyer, MarketInstance, UtilitySpec};
use tatonnement::scheduler::{
    run_simulation, ScenarioConfig, StalenessModel, StopReason, TimingModel,
};

#[test]
fn every_event_respects_sandwich_and_gap_law() {
    for name in corpus::MARKET_NAMES {
        for timing in corpus::TIMINGS {
            for staleness in StalenessModel::ALL {
                let s = CorpusScenario {
                    market: name,
                    timing,
                    staleness,
                };
                let mut cfg = s.config(6);
                cfg.horizon = 30.0;
                let trace = run_simulation(&s.market(), &cfg).unwrap();
                let mut last = vec![0.0; trace.goods()];
                for ev in &trace.events {
                    assert!(ev.z_min <= ev.z_tilde && ev.z_tilde <= ev.z_max, "{ev:?}");
                    assert!(
                        ev.z_min <= ev.z_accurate && ev.z_accurate <= ev.z_max,
                        "{ev:?}"
                    );
                    assert!(ev.dt > 0.0 && ev.dt <= 1.0 + GAP_TOLERANCE, "{ev:?}");
                    assert_eq!(ev.alpha_j, last[ev.good]);
                    last[ev.good] = ev.t;
                    let ratio = ev.p_after / ev.p_before;
                    assert!(ratio >= 1.0 - trace.lambda && ratio <= 1.0 + trace.lambda);
                }
                for t in last {
                    assert!(trace.end_time - t <= 1.0 + GAP_TOLERANCE);
                }
            }
        }
    }
}

#[test]
fn symmetric_leontief_settles_on_the_budget_line() {
    let m = MarketInstance::new(
        2,
        vec![Buyer::new(
            1.0,
            UtilitySpec::Leontief {
                coefficients: vec![1.0, 1.0],
            },
        )],
    )
    .unwrap();
    let cfg = ScenarioConfig::new(
        TimingModel::RoundRobin {
            period: 1.0,
            offsets: vec![0.0, 0.0],
        },
        StalenessModel::Endpoint,
        1.0 / 26.0,
        2000.0,
        vec![1.0, 1.0],
    )
    .with_stop_tolerance(Some(1e-3));
    let trace = run_simulation(&m, &cfg).unwrap();
    assert_eq!(trace.stop, StopReason::Converged);
    assert!(trace.end_time < 2000.0);
    let p = &trace.final_prices;
    assert!((p[0] + p[1] - 1.0).abs() < 1e-3);
    let z = m.excess_demand(p).unwrap();
    assert!(z.iter().all(|v| v.abs() < 1e-3));
}

#[test]
fn runs_are_bit_identical() {
    let s = CorpusScenario {
        market: "ces_mixed_3",
        timing: "poisson_clipped",
        staleness: StalenessModel::RandomPoint,
    };
    let m = s.market();
    let mut cfg = s.config(10);
    cfg.horizon = 50.0;
    assert_eq!(
        run_simulation(&m, &cfg).unwrap(),
        run_simulation(&m, &cfg).unwrap()
    );
}
