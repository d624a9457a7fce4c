use super::context::AnalysisError;
use crate::scheduler::SimulationTrace;

/// Least-squares line through `log(phi - phi_star)` against time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Gaps at or below this are rounding noise rather than progress.
pub fn noise_floor(phi_star: f64) -> f64 {
    64.0 * f64::EPSILON * (1.0 + phi_star.abs())
}

/// Fits the tail of a `(t, gap)` series: points up to the first gap at the
/// noise floor are kept, and the first 20% of those are dropped.
pub fn fit_gap_series(points: &[(f64, f64)], floor: f64) -> Result<ConvergenceFit, AnalysisError> {
    let usable = points
        .iter()
        .position(|(_, g)| *g <= floor)
        .unwrap_or(points.len());
    let prefix = &points[..usable];
    let skip = prefix.len() / 5;
    let tail = &prefix[skip..];
    if tail.len() < 2 {
        return Err(AnalysisError::Fit(
            "fewer than two gaps above the noise floor",
        ));
    }
    let xs: Vec<f64> = tail.iter().map(|(t, _)| *t).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, g)| g.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::Fit("all points share one time"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(ConvergenceFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: tail.len(),
    })
}

/// Fit of a simulated run against the reference potential `phi_star`.
pub fn convergence_fit(
    trace: &SimulationTrace,
    phi_star: f64,
) -> Result<ConvergenceFit, AnalysisError> {
    let points: Vec<(f64, f64)> = trace
        .events
        .iter()
        .map(|e| (e.t, e.phi - phi_star))
        .collect();
    fit_gap_series(&points, noise_floor(phi_star))
}
