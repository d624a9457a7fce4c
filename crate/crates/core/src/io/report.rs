use std::path::Path;

use serde::Serialize;

use super::{write_string, IoError};
use crate::analysis::{CheckSummary, CHECKERS};

pub fn report_to_csv(summary: &CheckSummary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["event", "checker", "lhs", "rhs", "margin", "pass"])
        .expect("in-memory write");
    for r in &summary.reports {
        w.write_record([
            r.event.to_string(),
            r.checker.to_string(),
            format!("{:.16e}", r.lhs),
            format!("{:.16e}", r.rhs),
            format!("{:.16e}", r.margin),
            r.pass.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn write_report_csv(path: &Path, summary: &CheckSummary) -> Result<(), IoError> {
    write_string(path, &report_to_csv(summary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckerSummary {
    pub checker: &'static str,
    pub checked: usize,
    pub failed: usize,
    pub worst_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub pass: bool,
    pub lambda: f64,
    pub events: usize,
    pub max_price: f64,
    pub final_residual: f64,
    pub checkers: Vec<CheckerSummary>,
}

impl ReportSummary {
    pub fn new(summary: &CheckSummary, lambda: f64, events: usize) -> Self {
        let worst = summary.worst();
        ReportSummary {
            pass: summary.all_pass(),
            lambda,
            events,
            max_price: summary.max_price,
            final_residual: summary.final_residual,
            checkers: CHECKERS
                .iter()
                .map(|c| {
                    let (checked, failed) = summary.counts(c);
                    CheckerSummary {
                        checker: c,
                        checked,
                        failed,
                        worst_margin: worst.iter().find(|w| w.0 == *c).map(|w| w.1),
                    }
                })
                .collect(),
        }
    }
}

pub fn write_summary_json(path: &Path, summary: &ReportSummary) -> Result<(), IoError> {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
    s.push('\n');
    write_string(path, &s)
}
