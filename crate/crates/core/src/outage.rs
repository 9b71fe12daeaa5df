//! Packet error (outage) probability `ε(snr, L, R)` and its inverse `R_ε`.
//!
//! Four backends are available through [`OutageModel`]:
//!
//! * `ExactL1`: closed-form exponential CDF, single fading block only.
//! * `GaussianFading`: codeword mutual information treated as
//!   `N(μ, σ²/L)` using the quadrature moments from [`mi_stats`].
//! * `MonteCarlo`: empirical distribution of codeword mutual information
//!   over seeded fading draws.
//! * `FiniteBlocklength`: for each fading draw the information density over
//!   `n` symbols is approximated as Gaussian with mean equal to the mutual
//!   information and variance `(1/L)·Σ 2γᵢ/(n(1+γᵢ))` (nats²), and the
//!   conditional tail probability is averaged over draws.
//!
//! Monte Carlo backends reuse one sample set for every rate they are asked
//! about (common random numbers), so ε is monotone in R and inverse maps are
//! deterministic. [`rate_mc`] inverts the raw empirical CDF. The prepared
//! [`OutageEvaluator`] used by the goodput optimizers inverts a Gaussian-kernel
//! smoothed empirical CDF (Silverman bandwidth, reflected at `R = 0`) instead,
//! which keeps `R_ε(1-ε)` free of order-statistic jitter when it is maximized.

use crate::channel_stats::{mi_stats, ChannelSpec};
use crate::error::{domain, Error, Result};
use crate::sampling::{fading_gain, map_samples};
use crate::special::{gaussian_tail, gaussian_tail_inv};
use std::f64::consts::LN_2;

/// Smallest and largest ε accepted by the inverse maps.
pub const EPS_CLAMP: f64 = 1e-9;

/// Default sample count for standalone outage estimates.
pub const DEFAULT_OUTAGE_SAMPLES: usize = 1_000_000;
/// Default sample count per operating point inside optimizers.
pub const DEFAULT_OPT_SAMPLES: usize = 100_000;

/// Evaluation backend for the outage probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutageModel {
    ExactL1,
    GaussianFading,
    MonteCarlo { samples: usize, seed: u64 },
    FiniteBlocklength { n: usize, samples: usize, seed: u64 },
}

impl OutageModel {
    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        OutageModel::MonteCarlo { samples, seed }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OutageModel::ExactL1 => "exact",
            OutageModel::GaussianFading => "gaussian",
            OutageModel::MonteCarlo { .. } => "mc",
            OutageModel::FiniteBlocklength { .. } => "finite",
        }
    }

    /// Same backend with the sample budget replaced (no-op for analytic ones).
    pub fn with_samples(self, samples: usize) -> Self {
        match self {
            OutageModel::MonteCarlo { seed, .. } => OutageModel::MonteCarlo { samples, seed },
            OutageModel::FiniteBlocklength { n, seed, .. } => {
                OutageModel::FiniteBlocklength { n, samples, seed }
            }
            other => other,
        }
    }

    pub fn validate(&self, spec: &ChannelSpec) -> Result<()> {
        match *self {
            OutageModel::ExactL1 if spec.diversity_l != 1 => Err(Error::Precondition(format!(
                "exact backend requires L = 1, got L = {}",
                spec.diversity_l
            ))),
            OutageModel::MonteCarlo { samples: 0, .. }
            | OutageModel::FiniteBlocklength { samples: 0, .. } => {
                Err(domain("sample count must be positive"))
            }
            OutageModel::FiniteBlocklength { n, .. } => {
                let l = spec.diversity_l as usize;
                if n < l || n % l != 0 {
                    Err(Error::Precondition(format!(
                        "blocklength n = {n} must be a positive multiple of L = {l}"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// A rate and the outage probability it incurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEpsPoint {
    pub rate_bits: f64,
    pub eps: f64,
}

/// Result of an inverse map; `clamped` is set when the requested ε would
/// need a negative rate and zero was returned instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseRate {
    pub rate_bits: f64,
    pub clamped: bool,
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

fn check_eps(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(eps.clamp(EPS_CLAMP, 1.0 - EPS_CLAMP))
}

fn require_l1(spec: &ChannelSpec) -> Result<()> {
    if spec.diversity_l != 1 {
        return Err(Error::Precondition(format!(
            "closed form requires L = 1, got L = {}",
            spec.diversity_l
        )));
    }
    Ok(())
}

/// `1 - exp(-(2^R - 1)/snr)`.
pub fn outage_exact_l1(spec: &ChannelSpec, rate_bits: f64) -> Result<f64> {
    require_l1(spec)?;
    if rate_bits <= 0.0 {
        return Ok(0.0);
    }
    let threshold = (rate_bits * LN_2).exp_m1() / spec.snr;
    Ok(-(-threshold).exp_m1())
}

/// `log2(1 - snr·ln(1-ε))`.
pub fn rate_exact_l1(spec: &ChannelSpec, eps: f64) -> Result<f64> {
    require_l1(spec)?;
    let eps = check_eps(eps)?;
    Ok((-spec.snr * (-eps).ln_1p()).ln_1p() / LN_2)
}

/// `Q(√L·(μ - R)/σ)`.
pub fn outage_gaussian(spec: &ChannelSpec, rate_bits: f64) -> Result<f64> {
    let st = mi_stats(spec.snr)?;
    Ok(gaussian_outage(st.mu_bits, st.sigma_bits, spec.diversity_l, rate_bits))
}

fn gaussian_outage(mu: f64, sigma: f64, l: u32, rate_bits: f64) -> f64 {
    gaussian_tail(f64::from(l).sqrt() * (mu - rate_bits) / sigma)
}

fn gaussian_rate(mu: f64, sigma: f64, l: u32, eps: f64) -> Result<InverseRate> {
    let eps = check_eps(eps)?;
    let r = mu - gaussian_tail_inv(eps)? * sigma / f64::from(l).sqrt();
    Ok(if r < 0.0 {
        InverseRate { rate_bits: 0.0, clamped: true }
    } else {
        InverseRate { rate_bits: r, clamped: false }
    })
}

/// `μ - Q⁻¹(ε)·σ/√L`, clamped below at zero.
pub fn rate_gaussian(spec: &ChannelSpec, eps: f64) -> Result<InverseRate> {
    let st = mi_stats(spec.snr)?;
    gaussian_rate(st.mu_bits, st.sigma_bits, spec.diversity_l, eps)
}

/// Codeword mutual information (bits/symbol) for `samples` seeded fading draws.
pub fn sample_codeword_mi(spec: &ChannelSpec, samples: usize, seed: u64) -> Vec<f64> {
    let l = spec.diversity_l as usize;
    let snr = spec.snr;
    map_samples(samples, seed, move |rng| {
        let mut acc = 0.0;
        for _ in 0..l {
            acc += (snr * fading_gain(rng)).ln_1p();
        }
        acc / (l as f64 * LN_2)
    })
}

/// Unbiased Monte Carlo outage estimate `P[(1/L)Σ log2(1+snr|hᵢ|²) ≤ R]`.
pub fn outage_mc(spec: &ChannelSpec, rate_bits: f64, samples: usize, seed: u64) -> Result<Estimate> {
    if samples == 0 {
        return Err(domain("sample count must be positive"));
    }
    if rate_bits <= 0.0 {
        return Ok(Estimate { value: 0.0, std_err: 0.0 });
    }
    let mi = sample_codeword_mi(spec, samples, seed);
    let hits = mi.iter().filter(|&&x| x <= rate_bits).count();
    Ok(binomial_estimate(hits, samples))
}

pub(crate) fn binomial_estimate(hits: usize, trials: usize) -> Estimate {
    let p = hits as f64 / trials as f64;
    Estimate {
        value: p,
        std_err: (p * (1.0 - p) / trials as f64).sqrt(),
    }
}

/// Rate whose Monte Carlo outage equals `eps`, by bisection on R over one
/// fixed sample set (raw empirical CDF).
pub fn rate_mc(spec: &ChannelSpec, eps: f64, samples: usize, seed: u64) -> Result<InverseRate> {
    if samples == 0 {
        return Err(domain("sample count must be positive"));
    }
    EmpiricalMi::new(sample_codeword_mi(spec, samples, seed)).raw_rate_for_eps(eps)
}

/// Finite-blocklength outage estimate with standard error.
pub fn outage_finite_n(
    spec: &ChannelSpec,
    rate_bits: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    OutageModel::FiniteBlocklength { n, samples, seed }.validate(spec)?;
    let fb = FiniteBlocklengthDraws::new(spec, n, samples, seed);
    Ok(fb.outage_with_err(rate_bits))
}

/// Sorted empirical sample of codeword mutual information.
#[derive(Debug, Clone)]
pub struct EmpiricalMi {
    sorted: Vec<f64>,
    mean: f64,
    std: f64,
    bandwidth: f64,
}

// Kernel support cut at ±KERNEL_REACH bandwidths (Φ(-9) ≈ 1e-19).
const KERNEL_REACH: f64 = 9.0;

impl EmpiricalMi {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let std = var.sqrt();
        // Silverman's rule of thumb.
        let bandwidth = 1.06 * std * n.powf(-0.2);
        Self { sorted: samples, mean, std, bandwidth }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std_dev(&self) -> f64 {
        self.std
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Raw fraction of samples at or below `rate_bits`.
    pub fn outage(&self, rate_bits: f64) -> f64 {
        self.sorted.partition_point(|&x| x <= rate_bits) as f64 / self.sorted.len() as f64
    }

    /// Kernel-smoothed empirical CDF at `rate_bits`, reflected at the
    /// `R = 0` boundary so that it vanishes there.
    pub fn smoothed_outage(&self, rate_bits: f64) -> f64 {
        let h = self.bandwidth;
        if h <= 0.0 {
            return self.outage(rate_bits);
        }
        if rate_bits <= 0.0 {
            return 0.0;
        }
        let lo = self.sorted.partition_point(|&x| x < rate_bits - KERNEL_REACH * h);
        let hi = self.sorted.partition_point(|&x| x <= rate_bits + KERNEL_REACH * h);
        let partial: f64 = self.sorted[lo..hi]
            .iter()
            .map(|&x| gaussian_tail((x - rate_bits) / h))
            .sum();
        let mirror_end = self.sorted.partition_point(|&x| x <= KERNEL_REACH * h - rate_bits);
        let mirrored: f64 = self.sorted[..mirror_end]
            .iter()
            .map(|&x| gaussian_tail((x + rate_bits) / h))
            .sum();
        ((lo as f64 + partial - mirrored) / self.sorted.len() as f64).max(0.0)
    }

    fn upper_rate(&self) -> f64 {
        self.mean + 10.0 * self.std.max(self.bandwidth) + KERNEL_REACH * self.bandwidth
    }

    /// Bisection on R for `smoothed_outage(R) = eps` over `[0, mean + 10·std]`.
    pub fn rate_for_eps(&self, eps: f64) -> Result<InverseRate> {
        let eps = check_eps(eps)?;
        let upper = self.upper_rate();
        if self.smoothed_outage(upper) < eps {
            return Err(Error::Domain(format!(
                "eps = {eps} not reachable for R in [0, {upper:.3}]"
            )));
        }
        let f = |r| self.smoothed_outage(r);
        // bracket around the raw quantile first, the smoothed CDF is within a few bandwidths of it
        let idx = ((eps * self.sorted.len() as f64) as usize).min(self.sorted.len() - 1);
        let q = self.sorted[idx];
        let reach = 12.0 * self.bandwidth;
        let (mut lo, mut hi) = ((q - reach).max(0.0), (q + reach).min(upper));
        if f(lo) > eps || f(hi) < eps {
            (lo, hi) = (0.0, upper);
        }
        let rate = solve_increasing(f, eps, lo, hi, 1e-10);
        Ok(InverseRate { rate_bits: rate, clamped: false })
    }

    /// Bisection on the raw empirical CDF; stops once the bracket is below 1e-6 bits.
    pub fn raw_rate_for_eps(&self, eps: f64) -> Result<InverseRate> {
        let eps = check_eps(eps)?;
        let upper = self.upper_rate();
        if self.outage(upper) < eps {
            return Err(Error::Domain(format!(
                "eps = {eps} not reachable for R in [0, {upper:.3}]"
            )));
        }
        if self.outage(0.0) >= eps {
            return Ok(InverseRate { rate_bits: 0.0, clamped: true });
        }
        let rate = bisect_increasing(|r| self.outage(r), eps, 0.0, upper, 1e-6);
        Ok(InverseRate { rate_bits: rate, clamped: false })
    }
}

/// Illinois regula falsi for continuous nondecreasing `f`; stops when the
/// bracket is narrower than `tol·(1+|x|)` or the residual vanishes.
fn solve_increasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo) - target;
    let mut fhi = f(hi) - target;
    if flo >= 0.0 {
        return lo;
    }
    if fhi <= 0.0 {
        return hi;
    }
    let mut side = 0i8;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        if hi - lo <= tol * (1.0 + hi.abs()) {
            break;
        }
        x = (lo * fhi - hi * flo) / (fhi - flo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x) - target;
        if fx.abs() <= 1e-15 * target {
            break;
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    x
}

/// Finds `x` in `[lo, hi]` with `f(x) ≈ target` for nondecreasing `f`.
fn bisect_increasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol * (1.0 + hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Per-draw conditional Gaussian parameters (nats) for the finite-blocklength backend.
#[derive(Debug, Clone)]
pub struct FiniteBlocklengthDraws {
    // (mean MI in nats, conditional std in nats), sorted by mean
    draws: Vec<(f64, f64)>,
    max_std: f64,
}

impl FiniteBlocklengthDraws {
    pub fn new(spec: &ChannelSpec, n: usize, samples: usize, seed: u64) -> Self {
        let l = spec.diversity_l as usize;
        let snr = spec.snr;
        let nf = n as f64;
        let mut draws = map_samples(samples, seed, move |rng| {
            let mut mean = 0.0;
            let mut var = 0.0;
            for _ in 0..l {
                let gamma = snr * fading_gain(rng);
                mean += gamma.ln_1p();
                var += 2.0 * gamma / (nf * (1.0 + gamma));
            }
            (mean / l as f64, (var / l as f64).sqrt())
        });
        draws.sort_by(|a, b| a.0.total_cmp(&b.0));
        let max_std = draws.iter().map(|d| d.1).fold(0.0, f64::max);
        Self { draws, max_std }
    }

    fn conditional(mean: f64, std: f64, rate_nats: f64) -> f64 {
        if std > 0.0 {
            gaussian_tail((mean - rate_nats) / std)
        } else if mean <= rate_nats {
            1.0
        } else {
            0.0
        }
    }

    pub fn outage(&self, rate_bits: f64) -> f64 {
        let r = rate_bits * LN_2;
        let reach = KERNEL_REACH * self.max_std;
        let lo = self.draws.partition_point(|d| d.0 < r - reach);
        let hi = self.draws.partition_point(|d| d.0 <= r + reach);
        let partial: f64 = self.draws[lo..hi]
            .iter()
            .map(|&(m, s)| Self::conditional(m, s, r))
            .sum();
        (lo as f64 + partial) / self.draws.len() as f64
    }

    pub fn outage_with_err(&self, rate_bits: f64) -> Estimate {
        let r = rate_bits * LN_2;
        let n = self.draws.len() as f64;
        let (s1, s2) = self.draws.iter().fold((0.0, 0.0), |(a, b), &(m, s)| {
            let q = Self::conditional(m, s, r);
            (a + q, b + q * q)
        });
        let mean = s1 / n;
        let var = ((s2 / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
        Estimate { value: mean, std_err: (var / n).sqrt() }
    }

    pub fn rate_for_eps(&self, eps: f64) -> Result<InverseRate> {
        let eps = check_eps(eps)?;
        if self.outage(0.0) >= eps {
            return Ok(InverseRate { rate_bits: 0.0, clamped: true });
        }
        let top = self.draws.last().map_or(0.0, |d| d.0) + KERNEL_REACH * self.max_std;
        let upper = top / LN_2 + 1.0;
        if self.outage(upper) < eps {
            return Err(Error::Domain(format!("eps = {eps} not reachable")));
        }
        Ok(InverseRate {
            rate_bits: solve_increasing(|r| self.outage(r), eps, 0.0, upper, 1e-10),
            clamped: false,
        })
    }
}

/// An outage backend prepared for repeated evaluation at one channel.
#[derive(Debug, Clone)]
pub enum OutageEvaluator {
    Exact { spec: ChannelSpec },
    Gaussian { mu: f64, sigma: f64, l: u32 },
    Empirical(EmpiricalMi),
    Finite(FiniteBlocklengthDraws),
}

impl OutageEvaluator {
    pub fn new(spec: &ChannelSpec, model: &OutageModel) -> Result<Self> {
        model.validate(spec)?;
        Ok(match *model {
            OutageModel::ExactL1 => OutageEvaluator::Exact { spec: *spec },
            OutageModel::GaussianFading => {
                let st = mi_stats(spec.snr)?;
                OutageEvaluator::Gaussian { mu: st.mu_bits, sigma: st.sigma_bits, l: spec.diversity_l }
            }
            OutageModel::MonteCarlo { samples, seed } => {
                OutageEvaluator::Empirical(EmpiricalMi::new(sample_codeword_mi(spec, samples, seed)))
            }
            OutageModel::FiniteBlocklength { n, samples, seed } => {
                OutageEvaluator::Finite(FiniteBlocklengthDraws::new(spec, n, samples, seed))
            }
        })
    }

    /// Outage probability at `rate_bits`.
    pub fn outage(&self, rate_bits: f64) -> f64 {
        match self {
            OutageEvaluator::Exact { spec } => outage_exact_l1(spec, rate_bits).unwrap_or(1.0),
            OutageEvaluator::Gaussian { mu, sigma, l } => gaussian_outage(*mu, *sigma, *l, rate_bits),
            OutageEvaluator::Empirical(e) => e.outage(rate_bits),
            OutageEvaluator::Finite(f) => f.outage(rate_bits),
        }
    }

    /// Rate `R_ε` at which the outage probability equals `eps`.
    pub fn rate_for_eps(&self, eps: f64) -> Result<InverseRate> {
        match self {
            OutageEvaluator::Exact { spec } => Ok(InverseRate {
                rate_bits: rate_exact_l1(spec, eps)?,
                clamped: false,
            }),
            OutageEvaluator::Gaussian { mu, sigma, l } => gaussian_rate(*mu, *sigma, *l, eps),
            OutageEvaluator::Empirical(e) => e.rate_for_eps(eps),
            OutageEvaluator::Finite(f) => f.rate_for_eps(eps),
        }
    }

    /// Mean codeword mutual information (bits/symbol) under this backend.
    pub fn mean_rate(&self) -> f64 {
        match self {
            OutageEvaluator::Exact { spec } => mi_stats(spec.snr).map_or(0.0, |s| s.mu_bits),
            OutageEvaluator::Gaussian { mu, .. } => *mu,
            OutageEvaluator::Empirical(e) => e.mean(),
            OutageEvaluator::Finite(f) => {
                f.draws.iter().map(|d| d.0).sum::<f64>() / (f.draws.len() as f64 * LN_2)
            }
        }
    }
}

/// Outage probability at `rate_bits` under `model`.
pub fn outage(spec: &ChannelSpec, rate_bits: f64, model: &OutageModel) -> Result<f64> {
    Ok(OutageEvaluator::new(spec, model)?.outage(rate_bits))
}

/// Rate `R_ε` under `model`.
pub fn rate_for_eps(spec: &ChannelSpec, eps: f64, model: &OutageModel) -> Result<InverseRate> {
    OutageEvaluator::new(spec, model)?.rate_for_eps(eps)
}
