use std::io::Write;
use std::path::Path;

use super::{read_to_string, with_path, write_string, FormatError, IoError};
use crate::scheduler::{SimulationTrace, UpdateEvent};

pub const TRACE_COLUMNS: [&str; 11] = [
    "t",
    "good",
    "dt",
    "z_tilde",
    "z_accurate",
    "z_min",
    "z_max",
    "gamma",
    "p_before",
    "p_after",
    "phi",
];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trace_to_csv(trace: &SimulationTrace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_COLUMNS).expect("in-memory write");
    for e in &trace.events {
        w.write_record([
            float(e.t),
            e.good.to_string(),
            float(e.dt),
            float(e.z_tilde),
            float(e.z_accurate),
            float(e.z_min),
            float(e.z_max),
            float(e.gamma),
            float(e.p_before),
            float(e.p_after),
            float(e.phi),
        ])
        .expect("in-memory write");
    }
    let mut bytes = w.into_inner().expect("in-memory flush");
    bytes.flush().expect("in-memory flush");
    String::from_utf8(bytes).expect("ascii output")
}

pub fn write_trace_csv(path: &Path, trace: &SimulationTrace) -> Result<(), IoError> {
    write_string(path, &trace_to_csv(trace))
}

/// Parses trace rows. `alpha_j` is rebuilt from each good's previous row.
pub fn parse_trace_events(text: &str) -> Result<Vec<UpdateEvent>, FormatError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| FormatError::Row {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(TRACE_COLUMNS) {
        return Err(FormatError::Row {
            line: 1,
            message: format!("expected header {}", TRACE_COLUMNS.join(",")),
        });
    }
    let mut last_time: Vec<f64> = Vec::new();
    let mut events = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| FormatError::Row {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64, FormatError> {
            record[i].parse::<f64>().map_err(|e| FormatError::Row {
                line,
                message: format!("{}: {e}", TRACE_COLUMNS[i]),
            })
        };
        let good: usize = record[1].parse().map_err(|e| FormatError::Row {
            line,
            message: format!("good: {e}"),
        })?;
        if good >= last_time.len() {
            last_time.resize(good + 1, 0.0);
        }
        let t = num(0)?;
        events.push(UpdateEvent {
            t,
            good,
            alpha_j: last_time[good],
            dt: num(2)?,
            z_tilde: num(3)?,
            z_accurate: num(4)?,
            z_min: num(5)?,
            z_max: num(6)?,
            gamma: num(7)?,
            p_before: num(8)?,
            p_after: num(9)?,
            phi: num(10)?,
        });
        last_time[good] = t;
    }
    Ok(events)
}

/// Step size implied by the recorded `gamma = max(1, z_tilde) / (lambda p)`;
/// the median over events.
pub fn infer_lambda(events: &[UpdateEvent]) -> Option<f64> {
    let mut v: Vec<f64> = events
        .iter()
        .map(|e| e.z_tilde.max(1.0) / (e.gamma * e.p_before))
        .filter(|l| l.is_finite() && *l > 0.0)
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

/// Reads a trace written by [`write_trace_csv`]. `lambda` defaults to the
/// value implied by the events.
pub fn read_trace_csv(
    path: &Path,
    goods: usize,
    lambda: Option<f64>,
) -> Result<SimulationTrace, IoError> {
    let text = read_to_string(path)?;
    with_path(path, trace_from_csv(&text, goods, lambda))
}

pub fn trace_from_csv(
    text: &str,
    goods: usize,
    lambda: Option<f64>,
) -> Result<SimulationTrace, FormatError> {
    let events = parse_trace_events(text)?;
    let lambda = match lambda.or_else(|| infer_lambda(&events)) {
        Some(l) => l,
        None => {
            return Err(FormatError::Invalid(
                "trace has no events to infer lambda from".into(),
            ))
        }
    };
    SimulationTrace::from_events(goods, lambda, events)
        .map_err(|e| FormatError::Invalid(e.to_string()))
}
