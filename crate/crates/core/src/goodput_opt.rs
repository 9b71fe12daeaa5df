//! Ideal-setting goodput `η = R_ε(1-ε)` and the error probability that maximizes it.

use crate::channel_stats::ChannelSpec;
use crate::error::{domain, Result};
use crate::outage::{OutageEvaluator, OutageModel};
use crate::search::golden_section_max;
use crate::special::{gaussian_tail_inv, lambert_w0};

/// Search interval for ε.
pub const EPS_SEARCH_MIN: f64 = 1e-6;
pub const EPS_SEARCH_MAX: f64 = 1.0 - 1e-6;
/// Golden-section bracket tolerance in ε.
pub const EPS_TOL: f64 = 1e-5;

/// Goodput-optimal operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodputReport {
    pub eps_star: f64,
    pub rate_star: f64,
    pub goodput_star: f64,
    pub model: OutageModel,
    pub iterations: usize,
    pub bracket_width: f64,
    /// False if the three-point unimodality check failed during the search.
    pub unimodal: bool,
}

/// `R_ε(1-ε)` under `model`.
pub fn goodput(spec: &ChannelSpec, eps: f64, model: &OutageModel) -> Result<f64> {
    let ev = OutageEvaluator::new(spec, model)?;
    goodput_with(&ev, eps)
}

/// `R_ε(1-ε)` on a prepared evaluator.
pub fn goodput_with(ev: &OutageEvaluator, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(ev.rate_for_eps(eps)?.rate_bits * (1.0 - eps))
}

/// Maximizes `R_ε(1-ε)` over ε by golden-section search.
pub fn optimize_eps(spec: &ChannelSpec, model: &OutageModel) -> Result<GoodputReport> {
    let ev = OutageEvaluator::new(spec, model)?;
    optimize_eps_with(&ev, model)
}

/// [`optimize_eps`] on a prepared evaluator (reused across constrained searches).
pub fn optimize_eps_with(ev: &OutageEvaluator, model: &OutageModel) -> Result<GoodputReport> {
    maximize_on(ev, model, EPS_SEARCH_MIN, EPS_SEARCH_MAX, |r, e| r * (1.0 - e))
}

/// Golden-section search of `objective(R_ε, ε)` for ε in `[lo, hi]`.
pub(crate) fn maximize_on<F>(
    ev: &OutageEvaluator,
    model: &OutageModel,
    lo: f64,
    hi: f64,
    objective: F,
) -> Result<GoodputReport>
where
    F: Fn(f64, f64) -> f64,
{
    let mut failure = None;
    let out = golden_section_max(
        |eps| match ev.rate_for_eps(eps) {
            Ok(r) => objective(r.rate_bits, eps),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        EPS_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let rate_star = ev.rate_for_eps(out.x)?.rate_bits;
    Ok(GoodputReport {
        eps_star: out.x,
        rate_star,
        goodput_star: rate_star * (1.0 - out.x),
        model: *model,
        iterations: out.iterations,
        bracket_width: out.bracket_width,
        unimodal: out.unimodal,
    })
}

/// Closed-form optimum for a single fading block: `1 - exp(1/snr - 1/W(snr))`.
///
/// From stationarity of `R(1-ε)` with `ε = 1 - exp(-(2^R-1)/snr)`, which gives
/// `R*·ln2 = W(snr)`. Note that a commonly printed variant with exponent
/// `(1-snr)/(snr·W(snr))` returns ε* = 0 at snr = 1 and disagrees with the
/// numerical optimum; this form matches it.
pub fn eps_star_l1_closed(snr: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(domain(format!("snr must be positive, got {snr}")));
    }
    let w = lambert_w0(snr)?;
    Ok(-(1.0 / snr - 1.0 / w).exp_m1())
}

/// Optimal rate for a single fading block, `W(snr)/ln 2`.
pub fn rate_star_l1_closed(snr: f64) -> Result<f64> {
    Ok(lambert_w0(snr)? / std::f64::consts::LN_2)
}

/// Stationarity residual of the Gaussian-model goodput:
/// `Q⁻¹(ε) + (1-ε)·√(2π)·exp(Q⁻¹(ε)²/2)`, which equals `1/κ` at the optimum.
fn gaussian_stationarity(eps: f64) -> f64 {
    let x = gaussian_tail_inv(eps).expect("eps inside (0, 1)");
    x + (1.0 - eps) * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp()
}

/// Maximizer of `(1 - κ·Q⁻¹(ε))(1-ε)`, by bisection on the fixed-point condition.
pub fn eps_star_gaussian(kappa_val: f64) -> Result<f64> {
    if !(kappa_val > 0.0 && kappa_val < 1.0) {
        return Err(domain(format!("kappa must lie in (0, 1), got {kappa_val}")));
    }
    let target = 1.0 / kappa_val;
    // The residual decreases from +∞ (ε → 0) to -∞ (ε → 1).
    let (mut lo, mut hi) = (1e-300_f64, 1.0 - 1e-12);
    if gaussian_stationarity(1e-9) < target {
        // optimum below 1e-9: search on a log scale
        let (mut a, mut b) = (lo.ln(), 1e-9f64.ln());
        while b - a > 1e-12 {
            let m = 0.5 * (a + b);
            if gaussian_stationarity(m.exp()) > target {
                a = m;
            } else {
                b = m;
            }
        }
        return Ok((0.5 * (a + b)).exp());
    }
    lo = lo.max(1e-9);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if gaussian_stationarity(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Normalized Gaussian-model goodput `(1 - κ·Q⁻¹(ε))(1-ε)`.
pub fn normalized_gaussian_goodput(kappa_val: f64, eps: f64) -> Result<f64> {
    Ok((1.0 - kappa_val * gaussian_tail_inv(eps)?) * (1.0 - eps))
}
