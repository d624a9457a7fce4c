use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::json;
use tatonnement::analysis::{check_trace, convergence_fit, reference_equilibrium};
use tatonnement::corpus::{self, derive_seed};
use tatonnement::dynamics::{max_safe_lambda, LambdaMode};
use tatonnement::io::{
    load_market, load_scenario, read_trace_csv, trace_to_csv, write_report_csv, write_summary_json,
    ReportSummary, ScenarioFile,
};
use tatonnement::scheduler::{run_simulation, ScenarioConfig};
use tatonnement::Market;

use crate::Command;

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate {
            market,
            scenario,
            out,
            seed,
            lambda,
            exploratory,
            horizon,
        } => simulate(&market, &scenario, &out, seed, lambda, exploratory, horizon),
        Command::Equilibrium { market, tol, out } => equilibrium(&market, tol, out.as_deref()),
        Command::Check {
            trace,
            market,
            lambda,
            report,
            summary,
        } => check(
            &trace,
            &market,
            lambda,
            report.as_deref(),
            summary.as_deref(),
        ),
        Command::Sweep {
            market,
            scenario,
            lambda_min,
            lambda_max,
            steps,
            seed,
            horizon,
            out,
        } => sweep(
            &market,
            &scenario,
            lambda_min,
            lambda_max,
            steps,
            seed,
            horizon,
            out.as_deref(),
        ),
        Command::Fit {
            trace,
            market,
            lambda,
            phi_star,
        } => fit(&trace, &market, lambda, phi_star),
    }
}

/// An existing path, or else a corpus entry of that name.
fn resolve(arg: &str, corpus_path: fn(&str) -> PathBuf) -> Result<PathBuf> {
    let direct = PathBuf::from(arg);
    if direct.exists() {
        return Ok(direct);
    }
    let named = corpus_path(arg);
    if named.exists() {
        return Ok(named);
    }
    bail!(
        "{arg}: no such file, and no corpus entry at {}",
        named.display()
    )
}

fn market(arg: &str) -> Result<Market> {
    Ok(load_market(&resolve(arg, corpus::market_path)?)?)
}

fn scenario(arg: &str) -> Result<ScenarioFile> {
    Ok(load_scenario(&resolve(arg, corpus::scenario_path)?)?)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| path.display().to_string()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

fn simulate(
    market_arg: &str,
    scenario_arg: &str,
    out: &Path,
    seed: Option<u64>,
    lambda: Option<f64>,
    exploratory: bool,
    horizon: Option<f64>,
) -> Result<ExitCode> {
    let m = market(market_arg)?;
    let file = scenario(scenario_arg)?;
    if file.is_stochastic() && seed.is_none() && file.seed.is_none() {
        bail!("this scenario draws random numbers; pass --seed");
    }
    let mut config = file.to_config(seed)?;
    if let Some(l) = lambda {
        config.lambda = l;
    }
    if exploratory {
        config.lambda_mode = LambdaMode::Exploratory;
    }
    if let Some(h) = horizon {
        config.horizon = h;
    }
    let trace = run_simulation(&m, &config)?;
    std::fs::write(out, trace_to_csv(&trace)).with_context(|| out.display().to_string())?;
    println!(
        "{} events, stopped at t = {} ({}), capped gaps {}",
        trace.events.len(),
        trace.end_time,
        trace.stop.as_str(),
        trace.capped_gaps
    );
    Ok(ExitCode::SUCCESS)
}

fn equilibrium(market_arg: &str, tol: f64, out: Option<&Path>) -> Result<ExitCode> {
    if !(tol > 0.0) {
        bail!("--tol must be positive");
    }
    let m = market(market_arg)?;
    let cert = reference_equilibrium(&m, tol)?;
    let value = json!({
        "p_star": cert.p_star,
        "residual": cert.residual,
        "tolerance": cert.tolerance,
        "iterations": cert.iterations,
        "method": cert.method,
        "phi_star": cert.phi_star,
        "valid": cert.valid(),
    });
    write_or_print(out, &pretty(&value))?;
    Ok(ExitCode::SUCCESS)
}

fn check(
    trace_path: &Path,
    market_arg: &str,
    lambda: Option<f64>,
    report: Option<&Path>,
    summary_path: Option<&Path>,
) -> Result<ExitCode> {
    let m = market(market_arg)?;
    let trace = read_trace_csv(trace_path, m.goods(), lambda)?;
    let summary = check_trace(&trace, &m)?;
    if let Some(path) = report {
        write_report_csv(path, &summary)?;
    }
    let overview = ReportSummary::new(&summary, trace.lambda, trace.events.len());
    match summary_path {
        Some(path) => write_summary_json(path, &overview)?,
        None => println!("{}", serde_json::to_string_pretty(&overview)?),
    }
    for r in summary.failures().take(10) {
        eprintln!(
            "FAIL {} at event {}: lhs {:e} rhs {:e} margin {:e}",
            r.checker, r.event, r.lhs, r.rhs, r.margin
        );
    }
    Ok(if summary.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        bail!("--steps must be at least 1");
    }
    if !(min > 0.0 && max >= min && max < 1.0) {
        bail!("need 0 < lambda-min <= lambda-max < 1");
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let h = (max - min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                max
            } else {
                min + h * i as f64
            }
        })
        .collect())
}

struct SweepRow {
    lambda: f64,
    mode: LambdaMode,
    seed: Option<u64>,
    outcome: Result<Outcome, String>,
}

struct Outcome {
    stop: &'static str,
    end_time: f64,
    events: usize,
    final_residual: f64,
    max_price: f64,
    checks_pass: bool,
}

fn sweep_one(
    m: &Market,
    base: &ScenarioConfig,
    lambda: f64,
    mode: LambdaMode,
) -> Result<Outcome, String> {
    let mut config = base.clone();
    config.lambda = lambda;
    config.lambda_mode = mode;
    let trace = run_simulation(m, &config).map_err(|e| e.to_string())?;
    let summary = check_trace(&trace, m).map_err(|e| e.to_string())?;
    Ok(Outcome {
        stop: trace.stop.as_str(),
        end_time: trace.end_time,
        events: trace.events.len(),
        final_residual: summary.final_residual,
        max_price: summary.max_price,
        checks_pass: summary.all_pass(),
    })
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    market_arg: &str,
    scenario_arg: &str,
    lambda_min: f64,
    lambda_max: f64,
    steps: usize,
    seed: Option<u64>,
    horizon: Option<f64>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let m = market(market_arg)?;
    let file = scenario(scenario_arg)?;
    if file.is_stochastic() && seed.is_none() {
        bail!("this scenario draws random numbers; pass --seed");
    }
    let lambdas = grid(lambda_min, lambda_max, steps)?;
    let safe = max_safe_lambda(m.class(), m.e_factor())?;
    let rows: Vec<SweepRow> = lambdas
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let row_seed = seed.map(|s| derive_seed(s, i as u64));
            let mode = if lambda <= safe {
                LambdaMode::Strict
            } else {
                LambdaMode::Exploratory
            };
            let outcome = file
                .to_config(row_seed)
                .map_err(|e| e.to_string())
                .and_then(|mut base| {
                    if let Some(h) = horizon {
                        base.horizon = h;
                    }
                    sweep_one(&m, &base, lambda, mode)
                });
            SweepRow {
                lambda,
                mode,
                seed: row_seed,
                outcome,
            }
        })
        .collect();

    let mut w = String::from(SWEEP_HEADER);
    for r in &rows {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        let cells = match &r.outcome {
            Ok(o) => vec![
                format!("{:.16e}", r.lambda),
                r.mode.as_str().into(),
                seed,
                o.stop.into(),
                format!("{:.16e}", o.end_time),
                o.events.to_string(),
                format!("{:.16e}", o.final_residual),
                format!("{:.16e}", o.max_price),
                o.checks_pass.to_string(),
                String::new(),
            ],
            Err(e) => vec![
                format!("{:.16e}", r.lambda),
                r.mode.as_str().into(),
                seed,
                "error".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.replace(['\n', ','], " "),
            ],
        };
        w.push_str(&cells.join(","));
        w.push('\n');
    }
    write_or_print(out, &w)?;
    Ok(ExitCode::SUCCESS)
}

const SWEEP_HEADER: &str =
    "lambda,mode,seed,stop,end_time,events,final_residual,max_price,checks_pass,error\n";

fn fit(
    trace_path: &Path,
    market_arg: &str,
    lambda: Option<f64>,
    phi_star: Option<f64>,
) -> Result<ExitCode> {
    let m = market(market_arg)?;
    let trace = read_trace_csv(trace_path, m.goods(), lambda)?;
    let phi_star = match phi_star {
        Some(v) => v,
        None => reference_equilibrium(&m, 1e-12)?.phi_star,
    };
    let f = convergence_fit(&trace, phi_star)?;
    let value = json!({
        "slope": f.slope,
        "intercept": f.intercept,
        "r_squared": f.r_squared,
        "points": f.points,
        "phi_star": phi_star,
    });
    print!("{}", pretty(&value));
    Ok(ExitCode::SUCCESS)
}
