//! The JSON corpus on disk must describe exactly the built-in corpus.
//! Run with `UPDATE_CORPUS=1` to rewrite the files.

use tatonnement::corpus::{self, MARKET_NAMES, SEEDS};
use tatonnement::io::{load_market, load_scenario, write_market, write_scenario};

fn updating() -> bool {
    std::env::var_os("UPDATE_CORPUS").is_some()
}

#[test]
fn market_files_match_builtin_markets() {
    for name in MARKET_NAMES {
        let m = corpus::market(name).unwrap();
        let path = corpus::market_path(name);
        if updating() {
            write_market(&path, &m).unwrap();
        }
        assert_eq!(load_market(&path).unwrap(), m, "{name}");
    }
}

#[test]
fn scenario_files_match_builtin_scenarios() {
    for s in corpus::scenarios() {
        let path = corpus::scenario_path(&s.name());
        if updating() {
            write_scenario(&path, &s.file()).unwrap();
        }
        let file = load_scenario(&path).unwrap();
        assert!(
            file.to_config(None).is_err(),
            "{} runs without a seed",
            s.name()
        );
        for seed in SEEDS {
            assert_eq!(
                file.to_config(Some(seed)).unwrap(),
                s.config(seed),
                "{}",
                s.name()
            );
        }
    }
}
