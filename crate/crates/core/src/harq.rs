//! Incremental-redundancy HARQ with at most `M` rounds per attempt.
//!
//! Round `t` of an attempt adds `(1/L)Σ_j log2(1+snr|h_tj|²)` bits of mutual
//! information; decoding succeeds at the first round where the running sum
//! exceeds `R_init`. If `M` rounds pass without success all `M` rounds are
//! spent and the packet restarts from scratch.

use crate::channel_stats::{mi_stats, ChannelSpec};
use crate::error::{domain, Result};
use crate::goodput_opt::optimize_eps;
use crate::outage::{binomial_estimate, outage, Estimate, OutageModel};
use crate::sampling::{fading_gain, map_samples};
use crate::search::golden_section_max;
use std::f64::consts::LN_2;

/// Round cap and first-round rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarqSpec {
    pub m_max: u32,
    pub r_init: f64,
}

impl HarqSpec {
    pub fn new(m_max: u32, r_init: f64) -> Result<Self> {
        if m_max == 0 {
            return Err(domain("HARQ round cap must be at least 1"));
        }
        if !(r_init > 0.0 && r_init.is_finite()) {
            return Err(domain(format!("initial rate must be positive, got {r_init}")));
        }
        Ok(Self { m_max, r_init })
    }
}

/// Cumulative per-round mutual information for a batch of HARQ attempts.
///
/// Draw order per attempt is round-major, so with `M = 1` the samples equal
/// those of [`crate::outage::sample_codeword_mi`] for the same seed.
#[derive(Debug, Clone)]
pub struct HarqDraws {
    m: usize,
    cum: Vec<f64>,
}

impl HarqDraws {
    pub fn new(spec: &ChannelSpec, m_max: u32, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(domain("sample count must be positive"));
        }
        if m_max == 0 {
            return Err(domain("HARQ round cap must be at least 1"));
        }
        let m = m_max as usize;
        let l = spec.diversity_l as usize;
        let snr = spec.snr;
        let rows = map_samples(samples, seed, move |rng| {
            let mut row = Vec::with_capacity(m);
            let mut acc = 0.0;
            for _ in 0..m {
                let mut round = 0.0;
                for _ in 0..l {
                    round += (snr * fading_gain(rng)).ln_1p();
                }
                acc += round / (l as f64 * LN_2);
                row.push(acc);
            }
            row
        });
        Ok(Self { m, cum: rows.into_iter().flatten().collect() })
    }

    pub fn len(&self) -> usize {
        self.cum.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.cum.is_empty()
    }

    pub fn rounds_cap(&self) -> u32 {
        self.m as u32
    }

    fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.cum.chunks_exact(self.m)
    }

    /// Rounds consumed by one attempt, `M` on failure.
    fn rounds(row: &[f64], r_init: f64) -> usize {
        row.iter().position(|&c| c > r_init).map_or(row.len(), |t| t + 1)
    }

    /// Probability that `M` rounds do not suffice.
    pub fn outage(&self, r_init: f64) -> Estimate {
        let hits = self.rows().filter(|row| row[self.m - 1] <= r_init).count();
        binomial_estimate(hits, self.len())
    }

    /// Probability that the first `m` rounds do not suffice, `1 ≤ m ≤ M`.
    pub fn outage_after(&self, m: usize, r_init: f64) -> Estimate {
        let hits = self.rows().filter(|row| row[m - 1] <= r_init).count();
        binomial_estimate(hits, self.len())
    }

    /// Mean rounds per attempt.
    pub fn expected_rounds(&self, r_init: f64) -> Estimate {
        let n = self.len() as f64;
        let (s, s2) = self.rows().fold((0.0, 0.0), |(s, s2), row| {
            let t = Self::rounds(row, r_init) as f64;
            (s + t, s2 + t * t)
        });
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0);
        Estimate { value: mean, std_err: (var / n).sqrt() }
    }

    /// `R_init(1-ε)/E[𝒯]` on this sample set, with a delta-method standard error.
    pub fn goodput(&self, r_init: f64) -> Estimate {
        let n = self.len() as f64;
        let mut sum_s = 0.0;
        let mut sum_t = 0.0;
        let mut pairs = Vec::with_capacity(self.len());
        for row in self.rows() {
            let t = Self::rounds(row, r_init) as f64;
            let s = if row[self.m - 1] > r_init { 1.0 } else { 0.0 };
            sum_s += s;
            sum_t += t;
            pairs.push((s, t));
        }
        let ratio = sum_s / sum_t;
        let mean_t = sum_t / n;
        let var = pairs.iter().map(|&(s, t)| (s - ratio * t).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Estimate {
            value: r_init * ratio,
            std_err: r_init * (var / n).sqrt() / mean_t,
        }
    }
}

/// Post-HARQ outage `P[Σ_{t≤M} I_t ≤ R_init]`.
pub fn harq_outage(spec: &ChannelSpec, hs: &HarqSpec, samples: usize, seed: u64) -> Result<Estimate> {
    Ok(HarqDraws::new(spec, hs.m_max, samples, seed)?.outage(hs.r_init))
}

/// Outage of the first round alone, under any backend.
pub fn harq_first_round_outage(spec: &ChannelSpec, hs: &HarqSpec, model: &OutageModel) -> Result<f64> {
    outage(spec, hs.r_init, model)
}

/// Mean rounds `E[𝒯]` per attempt.
pub fn harq_expected_rounds(spec: &ChannelSpec, hs: &HarqSpec, samples: usize, seed: u64) -> Result<Estimate> {
    Ok(HarqDraws::new(spec, hs.m_max, samples, seed)?.expected_rounds(hs.r_init))
}

/// Long-run HARQ goodput `R_init(1-ε)/E[𝒯]`.
pub fn harq_goodput(spec: &ChannelSpec, hs: &HarqSpec, samples: usize, seed: u64) -> Result<Estimate> {
    Ok(HarqDraws::new(spec, hs.m_max, samples, seed)?.goodput(hs.r_init))
}

/// Search tolerance on `R_init`, bits/symbol.
pub const RATE_TOL: f64 = 1e-2;

/// Result of [`optimize_initial_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarqOptimum {
    pub r_init_star: f64,
    pub goodput_star: f64,
    pub goodput_std_err: f64,
    pub unimodal: bool,
    /// Optimal single-shot rate for diversity `M·L` on the same sample budget.
    pub bound_rate: f64,
    /// `r_init_star/M ≤ bound_rate + 2·RATE_TOL`.
    pub bound_holds: bool,
}

/// Maximizes HARQ goodput over `R_init ∈ (0, M(μ + 6σ/√L)]`.
///
/// A coarse scan brackets the peak of the sample-based goodput, then
/// golden-section search refines it to [`RATE_TOL`]. The result is checked
/// against the optimal rate of a single-shot code spanning `M·L` blocks.
pub fn optimize_initial_rate(spec: &ChannelSpec, m_max: u32, samples: usize, seed: u64) -> Result<HarqOptimum> {
    let draws = HarqDraws::new(spec, m_max, samples, seed)?;
    let st = mi_stats(spec.snr)?;
    let m = f64::from(m_max);
    let hi = m * (st.mu_bits + 6.0 * st.sigma_bits / f64::from(spec.diversity_l).sqrt());

    const SCAN: usize = 64;
    let xs: Vec<f64> = (1..=SCAN).map(|i| hi * i as f64 / SCAN as f64).collect();
    let (best_i, _) = xs
        .iter()
        .map(|&r| draws.goodput(r).value)
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let lo_b = if best_i == 0 { 0.0 } else { xs[best_i - 1] };
    let hi_b = xs[(best_i + 1).min(SCAN - 1)];
    let out = golden_section_max(|r| draws.goodput(r).value, lo_b.max(1e-9), hi_b, RATE_TOL);
    let g = draws.goodput(out.x);

    let wide = spec.with_diversity(spec.diversity_l * m_max)?;
    let bound_rate = optimize_eps(&wide, &OutageModel::monte_carlo(samples, seed))?.rate_star;
    Ok(HarqOptimum {
        r_init_star: out.x,
        goodput_star: g.value,
        goodput_std_err: g.std_err,
        unimodal: out.unimodal,
        bound_rate,
        bound_holds: out.x / m <= bound_rate + 2.0 * RATE_TOL,
    })
}
