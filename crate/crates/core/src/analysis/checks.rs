use super::context::TraceContext;
use crate::scheduler::UpdateEvent;

/// Relative slack used by [`InequalityReport::new`].
pub const DEFAULT_REL_TOLERANCE: f64 = 1e-9;

/// Smallest net price move a drop window is checked for.
pub const DEFAULT_EPS_MIN: f64 = 1e-4;

/// Outcome of one `lhs >= rhs` check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub checker: &'static str,
    pub event: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl InequalityReport {
    /// Tolerance `1e-9 (1 + |lhs| + |rhs|)`.
    pub fn new(checker: &'static str, event: usize, lhs: f64, rhs: f64) -> Self {
        let tol = DEFAULT_REL_TOLERANCE * (1.0 + lhs.abs() + rhs.abs());
        Self::with_tolerance(checker, event, lhs, rhs, tol)
    }

    pub fn with_tolerance(
        checker: &'static str,
        event: usize,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        let margin = lhs - rhs;
        InequalityReport {
            checker,
            event,
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin >= -tolerance,
        }
    }
}

/// Per-update descent: `phi(before) - phi(after)` against
/// `(Gamma/4) dp^2/dt - (1/Gamma) (z - z_tilde)^2 dt`, where `z` is the
/// excess demand at the exact pre-update prices.
pub fn descent_margin(ctx: &TraceContext<'_>, e: usize) -> InequalityReport {
    let ev = &ctx.trace.events[e];
    let lhs = ctx.phi[e] - ctx.phi[e + 1];
    let dp = ev.delta_p();
    let gap = ctx.z_pre(e) - ev.z_tilde;
    let rhs = ev.gamma / 4.0 * dp * dp / ev.dt - gap * gap * ev.dt / ev.gamma;
    InequalityReport::new("descent", e, lhs, rhs)
}

/// The two lower bounds `Gamma` must clear, with pairwise bounds standing in
/// for the local Lipschitz parameters.
pub fn gamma_requirement_check(ctx: &TraceContext<'_>, e: usize) -> [InequalityReport; 2] {
    let ev = &ctx.trace.events[e];
    let j = ev.good;
    let p = &ctx.states[e];
    let out: f64 = (0..p.len())
        .filter(|&k| k != j)
        .map(|k| ctx.pair(e, j, k) * p[k] / p[j])
        .sum();
    let stale: f64 = ctx
        .window(e)
        .map(|nu| {
            let other = &ctx.trace.events[nu];
            ctx.pair(nu, other.good, j) * other.dt * ctx.states[nu][other.good] / p[j]
        })
        .sum();
    [
        InequalityReport::new("gamma_out", e, ev.gamma, 21.0 * ctx.c1 * out),
        InequalityReport::new("gamma_in", e, ev.gamma, 2.0 / ctx.c1 * stale),
    ]
}

/// Raw cross-partial sum at the pre-update prices against `theta x_j / p_j`.
pub fn hessian_sum_check(ctx: &TraceContext<'_>, e: usize) -> InequalityReport {
    let j = ctx.trace.events[e].good;
    let p = &ctx.states[e];
    let profile = &ctx.profiles[e];
    let raw: f64 = (0..p.len())
        .filter(|&k| k != j)
        .map(|k| {
            let h: f64 = ctx
                .market
                .buyers()
                .iter()
                .zip(&profile.x)
                .map(|(b, x)| b.utility.theta() * x[j] * x[k] / b.budget)
                .sum();
            h.abs() * p[k] / p[j]
        })
        .sum();
    let bound = ctx.market.theta() * (profile.z[j] + 1.0) / p[j];
    InequalityReport::new("hessian_sum", e, bound, raw)
}

/// `Gamma dp^2/dt >= (Gamma/2) dp'^2/dt - (1/Gamma)(z_tilde - z_alt)^2 dt`
/// with `dp' = z_alt dt / Gamma`.
pub fn shift_margin(ev: &UpdateEvent, index: usize, z_alt: f64) -> InequalityReport {
    let dp = ev.delta_p();
    let dp_alt = z_alt * ev.dt / ev.gamma;
    let lhs = ev.gamma * dp * dp / ev.dt;
    let shift = ev.z_tilde - z_alt;
    let rhs = ev.gamma / 2.0 * dp_alt * dp_alt / ev.dt - shift * shift * ev.dt / ev.gamma;
    InequalityReport::new("stale_shift", index, lhs, rhs)
}

/// `Phi = phi + A` must not increase from one state to the next.
pub fn phi_with_bank_monotone(ctx: &TraceContext<'_>) -> Vec<InequalityReport> {
    let big_phi = ctx.phi_with_bank();
    big_phi
        .windows(2)
        .enumerate()
        .map(|(e, w)| {
            let tol = DEFAULT_REL_TOLERANCE * (1.0 + w[0].abs().max(w[1].abs()));
            InequalityReport::with_tolerance("phi_monotone", e, w[0], w[1], tol)
        })
        .collect()
}

/// `Phi` drop between consecutive updates of one good against
/// `(Gamma/8) dp^2/dt`.
pub fn leontief_progress_check(ctx: &TraceContext<'_>, big_phi: &[f64]) -> Vec<InequalityReport> {
    ctx.trace
        .events
        .iter()
        .enumerate()
        .map(|(e, ev)| {
            let start = ctx.previous[e].map_or(0, |q| q + 1);
            let lhs = big_phi[start] - big_phi[e + 1];
            let rhs = ev.gamma / 8.0 * ev.delta_p() * ev.delta_p() / ev.dt;
            InequalityReport::new("leontief_progress", e, lhs, rhs)
        })
        .collect()
}

/// For every good and every run of its updates spanning at most two time
/// units, a net move of `eps` (capped at 1) must lower `Phi` by
/// `eps^2 min{1/16, 1/(64 lambda U)}`. Runs with `eps < eps_min` are skipped.
/// The report's `event` is the run's last update.
pub fn leontief_drop_check(
    ctx: &TraceContext<'_>,
    big_phi: &[f64],
    upper: f64,
    eps_min: f64,
) -> Vec<InequalityReport> {
    let lambda = ctx.trace.lambda;
    let scale = (1.0 / 16.0f64).min(1.0 / (64.0 * lambda * upper));
    let mut out = Vec::new();
    for good in 0..ctx.market.goods() {
        let idx: Vec<usize> = (0..ctx.trace.events.len())
            .filter(|&e| ctx.trace.events[e].good == good)
            .collect();
        let mut end = 0;
        for a in 0..idx.len() {
            end = end.max(a);
            while end + 1 < idx.len()
                && ctx.trace.events[idx[end + 1]].t - ctx.trace.events[idx[a]].t <= 2.0
            {
                end += 1;
            }
            if end == a {
                continue;
            }
            let (first, last) = (idx[a], idx[end]);
            let net = (ctx.trace.events[last].p_after - ctx.trace.events[first].p_after).abs();
            let eps = net.min(1.0);
            if eps < eps_min {
                continue;
            }
            let lhs = big_phi[first + 1] - big_phi[last + 1];
            out.push(InequalityReport::with_tolerance(
                "leontief_drop",
                last,
                lhs,
                eps * eps * scale,
                1e-9,
            ));
        }
    }
    out
}
