//! Practical ARQ: undetected-error (CRC) constraint, delay/reliability
//! constraint, and noisy ACK/NACK feedback with joint forward/feedback design.
//!
//! Feedback model: one acknowledgement bit is sent over `f` symbols spread
//! across `l_fb` independently Rayleigh-faded subchannels and combined with
//! MRC. With `ν = √(γ/(1+γ))`, `γ = (f/l_fb)·snr`, the average bit error
//! probability is `((1-ν)/2)^l_fb · Σ_{j<l_fb} C(l_fb-1+j, j)·((1+ν)/2)^j`.
//! The repetition factor `f/l_fb` is allowed to be fractional.
//!
//! Delay model: a packet gets at most `d` transmissions. A NACK read as ACK on
//! an undecoded packet loses it; an ACK read as NACK wastes one round, since
//! the receiver recognizes the repeat and re-acknowledges without decoding.

use crate::channel_stats::ChannelSpec;
use crate::error::{domain, Error, Result};
use crate::goodput_opt::{maximize_on, optimize_eps_with, GoodputReport, EPS_SEARCH_MAX, EPS_SEARCH_MIN};
use crate::outage::{OutageEvaluator, OutageModel};

/// Undetected-error requirement for a CRC of `k` bits on `n`-symbol codewords.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrcConfig {
    pub n: usize,
    pub k: u32,
    pub p: f64,
}

/// At most `d` rounds per packet; at most a fraction `q` of packets lost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayConstraint {
    pub d: u32,
    pub q: f64,
}

impl DelayConstraint {
    pub fn new(d: u32, q: f64) -> Result<Self> {
        if d == 0 {
            return Err(domain("round limit d must be at least 1"));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(domain(format!("loss bound q must lie in (0, 1), got {q}")));
        }
        Ok(Self { d, q })
    }

    /// Largest forward error probability compatible with ideal feedback, `q^{1/d}`.
    pub fn eps_cap(&self) -> f64 {
        self.q.powf(1.0 / f64::from(self.d))
    }
}

/// Acknowledgement channel: `f` symbols over `l_fb` faded subchannels at `snr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackSpec {
    pub f: u32,
    pub l_fb: u32,
    pub snr: f64,
}

impl FeedbackSpec {
    pub fn new(f: u32, l_fb: u32, snr: f64) -> Result<Self> {
        if f == 0 || l_fb == 0 {
            return Err(domain("feedback symbols and diversity must be at least 1"));
        }
        if !(snr > 0.0) {
            return Err(domain(format!("snr must be positive, got {snr}")));
        }
        Ok(Self { f, l_fb, snr })
    }
}

/// Result of [`crc_joint_optimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrcDesign {
    pub eps_star: f64,
    pub k_star: u32,
    pub rate_bits: f64,
    pub effective_goodput: f64,
    /// ε* of the same channel without the undetected-error constraint.
    pub eps_unconstrained: f64,
    /// `⌈-log2(p/ε_unconstrained)⌉`, floored at zero.
    pub k_rule: u32,
}

impl CrcDesign {
    pub fn crc(&self, n: usize, p: f64) -> CrcConfig {
        CrcConfig { n, k: self.k_star, p }
    }
}

/// Joint forward/feedback operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyArqDesign {
    pub eps: f64,
    pub eps_fb: f64,
    pub f: u32,
    pub rate_bits: f64,
    pub xi_d: f64,
    pub expected_rounds: f64,
    pub goodput: f64,
}

/// Largest CRC length ever considered.
pub const MAX_CRC_BITS: u32 = 64;

/// Smallest `k ≥ 0` with `ε·2^{-k} ≤ p`.
pub fn min_crc_bits(eps: f64, p: f64) -> u32 {
    let k = (eps / p).log2().ceil();
    if k <= 0.0 {
        0
    } else {
        k as u32
    }
}

/// Maximizes `(R_ε - k/n)(1-ε)` subject to `ε·2^{-k} ≤ p`.
///
/// For each `k` the objective is concave in ε, so the inner problem is a
/// golden-section search on `[ε_min, min(p·2^k, ε_max)]`.
pub fn crc_joint_optimize(spec: &ChannelSpec, n: usize, p: f64, model: &OutageModel) -> Result<CrcDesign> {
    if n == 0 {
        return Err(domain("codeword length n must be positive"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("undetected-error bound p must lie in (0, 1), got {p}")));
    }
    let ev = OutageEvaluator::new(spec, model)?;
    let unconstrained = optimize_eps_with(&ev, model)?;
    let mut best: Option<CrcDesign> = None;
    for k in 0..=MAX_CRC_BITS {
        let overhead = f64::from(k) / n as f64;
        let hi = (p * 2f64.powi(k as i32)).min(EPS_SEARCH_MAX);
        if hi < EPS_SEARCH_MIN {
            continue;
        }
        let lo = EPS_SEARCH_MIN;
        let rep = maximize_on(&ev, model, lo, hi, |r, e| (r - overhead) * (1.0 - e))?;
        let value = (rep.rate_star - overhead) * (1.0 - rep.eps_star);
        if value > 0.0 && best.is_none_or(|b| value > b.effective_goodput) {
            best = Some(CrcDesign {
                eps_star: rep.eps_star,
                k_star: k,
                rate_bits: rep.rate_star,
                effective_goodput: value,
                eps_unconstrained: unconstrained.eps_star,
                k_rule: min_crc_bits(unconstrained.eps_star, p),
            });
        }
    }
    best.ok_or_else(|| {
        Error::Infeasible(format!(
            "no (eps, k) with k <= {MAX_CRC_BITS} meets eps*2^-k <= {p:e} with positive effective rate"
        ))
    })
}

/// Maximizes `R_ε(1-ε)` subject to `ε^d ≤ q`, i.e. `ε ≤ q^{1/d}`.
pub fn delay_constrained_optimize(spec: &ChannelSpec, dc: &DelayConstraint, model: &OutageModel) -> Result<GoodputReport> {
    let ev = OutageEvaluator::new(spec, model)?;
    let free = optimize_eps_with(&ev, model)?;
    let cap = dc.eps_cap();
    if free.eps_star <= cap {
        return Ok(free);
    }
    let rate = ev.rate_for_eps(cap)?.rate_bits;
    Ok(GoodputReport {
        eps_star: cap,
        rate_star: rate,
        goodput_star: rate * (1.0 - cap),
        ..free
    })
}

/// Average bit error probability of the MRC-combined acknowledgement.
pub fn feedback_error_prob(fb: &FeedbackSpec) -> f64 {
    feedback_error_prob_raw(f64::from(fb.f), fb.l_fb, fb.snr)
}

fn feedback_error_prob_raw(f: f64, l_fb: u32, snr: f64) -> f64 {
    let gamma = f / f64::from(l_fb) * snr;
    let nu = (gamma / (1.0 + gamma)).sqrt();
    // 1 - ν computed without cancellation for large γ
    let one_minus_nu = 1.0 / ((1.0 + gamma) * (1.0 + nu));
    let lower = 0.5 * one_minus_nu;
    let upper = 0.5 * (1.0 + nu);
    let mut sum = 0.0;
    let mut binom = 1.0;
    for j in 0..l_fb {
        if j > 0 {
            binom *= f64::from(l_fb - 1 + j) / f64::from(j);
        }
        sum += binom * upper.powi(j as i32);
    }
    lower.powi(l_fb as i32) * sum
}

/// Smallest `f ≥ 1` whose feedback error probability is at most `target`.
pub fn min_feedback_symbols(snr: f64, l_fb: u32, target: f64) -> Result<u32> {
    if !(target > 0.0 && target < 0.5) {
        return Err(domain(format!("target must lie in (0, 0.5), got {target}")));
    }
    if !(snr > 0.0) || l_fb == 0 {
        return Err(domain("snr must be positive and l_fb at least 1"));
    }
    let ok = |f: u32| feedback_error_prob_raw(f64::from(f), l_fb, snr) <= target;
    let mut hi = 1u32;
    while !ok(hi) {
        if hi >= u32::MAX / 2 {
            return Err(domain(format!("target {target} needs more than {hi} symbols")));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    if hi == 1 {
        return Ok(1);
    }
    // ok(lo) is false, ok(hi) is true
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn check_probs(eps: f64, eps_fb: f64, d: u32) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) || !(0.0..=1.0).contains(&eps_fb) {
        return Err(domain(format!("probabilities must lie in [0, 1], got eps={eps}, eps_fb={eps_fb}")));
    }
    if d == 0 {
        return Err(domain("round limit d must be at least 1"));
    }
    Ok(())
}

/// Loss probability as a sum of loss events: a NACK→ACK flip after a failure
/// in rounds `1..d`, or `d` failures with every NACK delivered.
pub fn loss_by_events(eps: f64, eps_fb: f64, d: u32) -> f64 {
    let good_nack = 1.0 - eps_fb;
    let mut total = 0.0;
    let mut prefix = 1.0; // ε^{i-1}(1-ε_fb)^{i-1}
    for _ in 1..d {
        total += prefix * eps * eps_fb;
        prefix *= eps * good_nack;
    }
    total + prefix * eps
}

/// Loss probability as the complement of the success events.
pub fn loss_by_complement(eps: f64, eps_fb: f64, d: u32) -> f64 {
    let step = eps * (1.0 - eps_fb);
    let mut success = 0.0;
    let mut prefix = 1.0;
    for _ in 1..=d {
        success += (1.0 - eps) * prefix;
        prefix *= step;
    }
    1.0 - success
}

/// Probability that a packet is not delivered within `d` rounds.
///
/// Both the event sum and the success complement are evaluated; they must
/// agree to 1e-12.
pub fn packet_loss_prob(eps: f64, eps_fb: f64, d: u32) -> Result<f64> {
    check_probs(eps, eps_fb, d)?;
    let a = loss_by_events(eps, eps_fb, d);
    let b = loss_by_complement(eps, eps_fb, d);
    if (a - b).abs() > 1e-12 {
        return Err(Error::Consistency(format!(
            "loss formulas disagree: {a} vs {b} (eps={eps}, eps_fb={eps_fb}, d={d})"
        )));
    }
    Ok(a)
}

/// Mean number of rounds spent on one packet, with the convention `0^0 = 1`.
pub fn expected_rounds(eps: f64, eps_fb: f64, d: u32) -> Result<f64> {
    check_probs(eps, eps_fb, d)?;
    Ok(expected_rounds_raw(eps, eps_fb, d))
}

fn expected_rounds_raw(eps: f64, eps_fb: f64, d: u32) -> f64 {
    // powi(0) == 1 for every base, which supplies the 0^0 = 1 convention.
    let pw = |x: f64, k: u32| x.powi(k as i32);
    let good = 1.0 - eps_fb;
    let mut total = 0.0;
    for i in 1..d {
        let lost_now = pw(eps, i) * pw(good, i - 1) * eps_fb;
        let acked_now: f64 = (1..=i)
            .map(|j| pw(eps, j - 1) * pw(good, j) * (1.0 - eps) * pw(eps_fb, i - j))
            .sum();
        total += f64::from(i) * (lost_now + acked_now);
    }
    let exhausted = pw(eps, d - 1) * pw(good, d - 1)
        + (1..d)
            .map(|j| pw(eps, j - 1) * pw(good, j - 1) * (1.0 - eps) * pw(eps_fb, d - j))
            .sum::<f64>();
    total + f64::from(d) * exhausted
}

/// `n/(n+f) · R·(1-ξ_d)/E[X]` from its ingredients; `f = 0` models free feedback.
pub fn noisy_goodput_from_parts(rate_bits: f64, eps: f64, eps_fb: f64, f: u32, d: u32, n: usize) -> Result<f64> {
    let xi = packet_loss_prob(eps, eps_fb, d)?;
    let ex = expected_rounds(eps, eps_fb, d)?;
    let nf = n as f64;
    Ok(nf / (nf + f64::from(f)) * rate_bits * (1.0 - xi) / ex)
}

/// Goodput with noisy acknowledgements, delay limit and feedback overhead.
pub fn noisy_fb_goodput(
    spec: &ChannelSpec,
    eps: f64,
    fb: &FeedbackSpec,
    dc: &DelayConstraint,
    n: usize,
    model: &OutageModel,
) -> Result<f64> {
    if n == 0 {
        return Err(domain("codeword length n must be positive"));
    }
    let rate = OutageEvaluator::new(spec, model)?.rate_for_eps(eps)?.rate_bits;
    noisy_goodput_from_parts(rate, eps, feedback_error_prob(fb), fb.f, dc.d, n)
}

/// The simplified feasibility test `ε·ε_fb ≤ q` and `ε ≤ q^{1/d}`.
///
/// Exposed as a diagnostic only; it loses accuracy as ε approaches the cap.
pub fn simplified_constraints_hold(eps: f64, eps_fb: f64, dc: &DelayConstraint) -> bool {
    eps * eps_fb <= dc.q && eps <= dc.eps_cap()
}

/// Number of forward error probabilities on the log grid.
pub const JOINT_EPS_GRID: usize = 200;

/// Grid search for the goodput-maximizing `(ε, f)` subject to `ξ_d ≤ q`.
///
/// ε runs over a log grid on `[1e-6, q^{1/d}]`, refined once around the
/// incumbent at half the spacing; `f` runs over `1..=f_max`, where `f_max`
/// is the first symbol count with `ε_fb ≤ q`. Ties go to the smaller `f`.
pub fn joint_optimize_noisy_fb(
    spec: &ChannelSpec,
    l_fb: u32,
    dc: &DelayConstraint,
    n: usize,
    model: &OutageModel,
) -> Result<NoisyArqDesign> {
    let designer = FeedbackDesigner::new(spec, l_fb, dc, n, model)?;
    let grid = designer.eps_grid();
    let (lo, hi) = (grid[0], grid[JOINT_EPS_GRID - 1]);
    let step = (hi / lo).ln() / (JOINT_EPS_GRID - 1) as f64;

    let mut incumbent: Option<(usize, NoisyArqDesign)> = None;
    for (i, &eps) in grid.iter().enumerate() {
        if let Some(cand) = designer.best_for_eps(eps)? {
            if incumbent.is_none_or(|(_, b)| cand.goodput > b.goodput) {
                incumbent = Some((i, cand));
            }
        }
    }
    let (i, mut best) = incumbent.ok_or_else(|| {
        Error::Infeasible(format!("no (eps, f) on the grid meets xi_d <= {:e}", dc.q))
    })?;

    // one refinement pass at half the grid spacing around the incumbent
    let half = (0.5 * step).exp();
    for eps in [grid[i] / half, grid[i] * half] {
        if eps < lo || eps > hi {
            continue;
        }
        if let Some(cand) = designer.best_for_eps(eps)? {
            if cand.goodput > best.goodput {
                best = cand;
            }
        }
    }
    Ok(best)
}

/// Best feedback length for each forward error probability, for one channel
/// and constraint set.
#[derive(Debug, Clone)]
pub struct FeedbackDesigner {
    ev: OutageEvaluator,
    eps_fb_table: Vec<f64>,
    dc: DelayConstraint,
    n: usize,
}

impl FeedbackDesigner {
    pub fn new(spec: &ChannelSpec, l_fb: u32, dc: &DelayConstraint, n: usize, model: &OutageModel) -> Result<Self> {
        if n == 0 {
            return Err(domain("codeword length n must be positive"));
        }
        let ev = OutageEvaluator::new(spec, model)?;
        let f_max = min_feedback_symbols(spec.snr, l_fb, dc.q.min(0.49))?;
        let eps_fb_table = (1..=f_max)
            .map(|f| feedback_error_prob_raw(f64::from(f), l_fb, spec.snr))
            .collect();
        Ok(Self { ev, eps_fb_table, dc: *dc, n })
    }

    /// Largest feedback length considered; its `ε_fb` is at most `q`.
    pub fn f_max(&self) -> u32 {
        self.eps_fb_table.len() as u32
    }

    /// The log-spaced ε grid on `[1e-6, q^{1/d}]`.
    pub fn eps_grid(&self) -> Vec<f64> {
        let hi = self.dc.eps_cap();
        let lo = 1e-6_f64.min(hi);
        let step = (hi / lo).ln() / (JOINT_EPS_GRID - 1) as f64;
        (0..JOINT_EPS_GRID)
            .map(|i| if i + 1 == JOINT_EPS_GRID { hi } else { lo * (step * i as f64).exp() })
            .collect()
    }

    /// Goodput-maximizing feasible `f` at this ε, smallest `f` on ties;
    /// `None` when no `f ≤ f_max` meets `ξ_d ≤ q`.
    pub fn best_for_eps(&self, eps: f64) -> Result<Option<NoisyArqDesign>> {
        let rate = self.ev.rate_for_eps(eps)?.rate_bits;
        let d = self.dc.d;
        let nf = self.n as f64;
        let mut best: Option<NoisyArqDesign> = None;
        for (idx, &eps_fb) in self.eps_fb_table.iter().enumerate() {
            let xi = loss_by_events(eps, eps_fb, d);
            if xi > self.dc.q {
                continue;
            }
            let f = idx as u32 + 1;
            let ex = expected_rounds_raw(eps, eps_fb, d);
            let g = nf / (nf + f64::from(f)) * rate * (1.0 - xi) / ex;
            if best.is_none_or(|b| g > b.goodput) {
                best = Some(NoisyArqDesign { eps, eps_fb, f, rate_bits: rate, xi_d: xi, expected_rounds: ex, goodput: g });
            }
        }
        Ok(best)
    }
}

/// Best goodput at `ε = q` (the "make the PHY reliable" alternative), optimized over `f`.
pub fn reliable_phy_goodput(
    spec: &ChannelSpec,
    l_fb: u32,
    dc: &DelayConstraint,
    n: usize,
    model: &OutageModel,
) -> Result<f64> {
    let rate = OutageEvaluator::new(spec, model)?.rate_for_eps(dc.q)?.rate_bits;
    let f_max = min_feedback_symbols(spec.snr, l_fb, dc.q.min(0.49))?;
    let mut best = 0.0f64;
    for f in 1..=f_max {
        let eps_fb = feedback_error_prob_raw(f64::from(f), l_fb, spec.snr);
        if loss_by_events(dc.q, eps_fb, dc.d) <= dc.q {
            best = best.max(noisy_goodput_from_parts(rate, dc.q, eps_fb, f, dc.d, n)?);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crc_bits_arithmetic() {
        assert_eq!(min_crc_bits(0.1, 1e-6), 17);
        assert_eq!(min_crc_bits(0.1, 0.2), 0);
        assert_eq!(min_crc_bits(0.1, 0.1), 0);
        assert_eq!(min_crc_bits(0.1, 0.05), 1);
    }

    #[test]
    fn delay_cap_arithmetic() {
        let dc = DelayConstraint::new(3, 1e-6).unwrap();
        assert!((dc.eps_cap() - 1e-2).abs() < 1e-15);
        assert!(DelayConstraint::new(0, 0.1).is_err());
        assert!(DelayConstraint::new(2, 1.0).is_err());
    }

    #[test]
    fn feedback_integer_points() {
        let snr = 10f64.powf(0.5);
        let fb = |f, l| feedback_error_prob(&FeedbackSpec::new(f, l, snr).unwrap());
        assert!(fb(79, 1) <= 1e-3 && fb(78, 1) > 1e-3);
        assert!(fb(9, 2) <= 1e-3 && fb(8, 2) > 1e-3);
        assert_eq!(min_feedback_symbols(snr, 1, 1e-3).unwrap(), 79);
        assert_eq!(min_feedback_symbols(snr, 2, 1e-3).unwrap(), 9);
        assert!(fb(1, 1) < 0.49);
        assert_eq!(min_feedback_symbols(snr, 1, 0.49).unwrap(), 1);
        assert!(fb(u32::MAX / 4, 1) < 1e-9);
    }

    #[test]
    fn feedback_l1_closed_form() {
        // L_fb = 1 reduces to (1 - √(γ/(1+γ)))/2
        for &g in &[0.1f64, 1.0, 10.0, 1e4] {
            let direct = 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
            let v = feedback_error_prob_raw(1.0, 1, g);
            assert!((v - direct).abs() <= 1e-12 * direct.max(1e-300) + 1e-16);
        }
    }

    #[test]
    fn feedback_monotone() {
        for l in 1..=5 {
            let mut prev = 1.0;
            for f in 1..200 {
                let v = feedback_error_prob_raw(f64::from(f), l, 2.0);
                assert!(v < prev);
                prev = v;
            }
        }
        assert!(feedback_error_prob_raw(10.0, 2, 1.0) < feedback_error_prob_raw(10.0, 2, 0.5));
        assert!(feedback_error_prob_raw(40.0, 2, 3.0) < feedback_error_prob_raw(40.0, 1, 3.0));
    }

    #[test]
    fn min_symbols_monotone_in_target() {
        let mut prev = u32::MAX;
        for t in [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.3] {
            let f = min_feedback_symbols(2.0, 2, t).unwrap();
            assert!(f <= prev);
            prev = f;
        }
        assert!(min_feedback_symbols(2.0, 2, 0.5).is_err());
    }

    #[test]
    fn loss_examples() {
        assert!((packet_loss_prob(0.3, 0.0, 3).unwrap() - 0.027).abs() < 1e-15);
        assert!((packet_loss_prob(0.1, 0.1, 2).unwrap() - 0.019).abs() < 1e-15);
        assert_eq!(packet_loss_prob(0.0, 0.4, 5).unwrap(), 0.0);
        assert!(packet_loss_prob(0.1, 0.1, 0).is_err());
        assert!(packet_loss_prob(1.1, 0.1, 2).is_err());
    }

    #[test]
    fn loss_increasing() {
        for d in 1..6 {
            for i in 0..20 {
                let e = i as f64 / 20.0;
                let a = packet_loss_prob(e, 0.2, d).unwrap();
                assert!(packet_loss_prob(e + 0.05, 0.2, d).unwrap() >= a);
                assert!(packet_loss_prob(e, 0.25, d).unwrap() >= a);
            }
        }
    }

    #[test]
    fn rounds_examples() {
        assert_eq!(expected_rounds(0.0, 0.0, 4).unwrap(), 1.0);
        assert!((expected_rounds(0.5, 0.0, 2).unwrap() - 1.5).abs() < 1e-15);
        assert!((expected_rounds(0.0, 0.5, 2).unwrap() - 1.5).abs() < 1e-15);
        // ideal feedback: truncated geometric mean (1 - ε^d)/(1 - ε)
        for d in 1..10 {
            let e: f64 = 0.37;
            let v = expected_rounds(e, 0.0, d).unwrap();
            assert!((v - (1.0 - e.powi(d as i32)) / (1.0 - e)).abs() < 1e-12);
            assert!((1.0..=f64::from(d)).contains(&v));
        }
    }

    #[test]
    fn ideal_limit_of_noisy_goodput() {
        for &e in &[0.01, 0.1, 0.3, 0.5] {
            let g = noisy_goodput_from_parts(2.0, e, 0.0, 0, 60, 200).unwrap();
            assert!((g - 2.0 * (1.0 - e)).abs() < 1e-9, "eps={e}");
        }
    }

    #[test]
    fn noisy_goodput_decreases_with_overhead() {
        let spec = ChannelSpec::new(10.0, 4).unwrap();
        let dc = DelayConstraint::new(3, 1e-6).unwrap();
        let m = OutageModel::GaussianFading;
        let mut prev = f64::MAX;
        for f in [200, 400, 800, 1600] {
            let fb = FeedbackSpec::new(f, 2, 3.0).unwrap();
            let g = noisy_fb_goodput(&spec, 1e-2, &fb, &dc, 200, &m).unwrap();
            assert!(g > 0.0);
            assert!(g < prev, "f={f} g={g} prev={prev}");
            prev = g;
        }
    }

    #[test]
    fn delay_constrained_examples() {
        let spec = ChannelSpec::new(10.0, 2).unwrap();
        let m = OutageModel::GaussianFading;
        let free = crate::goodput_opt::optimize_eps(&spec, &m).unwrap();
        let slack = delay_constrained_optimize(&spec, &DelayConstraint::new(1, 0.99).unwrap(), &m).unwrap();
        assert_eq!(slack.eps_star, free.eps_star);
        let dc = DelayConstraint::new(3, 1e-6).unwrap();
        let tight = delay_constrained_optimize(&spec, &dc, &m).unwrap();
        assert!((tight.eps_star - 0.01).abs() < 1e-12);
        let ev = OutageEvaluator::new(&spec, &m).unwrap();
        for i in 1..100 {
            let e = 0.01 * i as f64 / 100.0;
            let g = crate::goodput_opt::goodput_with(&ev, e).unwrap();
            assert!(tight.goodput_star >= g);
        }
    }

    #[test]
    fn crc_inactive_constraint() {
        let spec = ChannelSpec::new(10.0, 2).unwrap();
        let m = OutageModel::GaussianFading;
        let d = crc_joint_optimize(&spec, 200, 0.9, &m).unwrap();
        assert_eq!(d.k_star, 0);
        assert!((d.eps_star - d.eps_unconstrained).abs() < 1e-4);
        assert!(crc_joint_optimize(&spec, 0, 0.1, &m).is_err());
    }

    #[test]
    fn crc_against_grid_oracle() {
        let spec = ChannelSpec::new(10.0, 2).unwrap();
        let m = OutageModel::GaussianFading;
        let n = 500;
        let p = 1e-6;
        let d = crc_joint_optimize(&spec, n, p, &m).unwrap();
        let ev = OutageEvaluator::new(&spec, &m).unwrap();
        let mut best = (0.0, 0u32, f64::MIN);
        for i in 0..4000 {
            let e = 1e-6 * (1e6f64).powf(i as f64 / 4000.0) * (1.0 - 1e-6);
            let r = ev.rate_for_eps(e).unwrap().rate_bits;
            for k in 0..=64u32 {
                if e * 2f64.powi(-(k as i32)) > p {
                    continue;
                }
                let v = (r - f64::from(k) / n as f64) * (1.0 - e);
                if v > best.2 {
                    best = (e, k, v);
                }
            }
        }
        assert_eq!(d.k_star, best.1);
        assert!((d.eps_star / best.0 - 1.0).abs() < 0.01, "{} vs {}", d.eps_star, best.0);
        assert!(d.effective_goodput >= best.2 - 1e-9);
        assert!((i64::from(d.k_star) - i64::from(d.k_rule)).abs() <= 1);
    }
}
