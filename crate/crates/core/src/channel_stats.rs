//! Rayleigh block-fading channel parameters and the statistics of per-block
//! mutual information `log2(1 + snr·|h|²)`, `|h|² ~ Exp(1)`.

use crate::error::{domain, Result};
use crate::quadrature::integrate;

/// Average SNR and the number of i.i.d. fading blocks spanned by one codeword.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    /// Linear power ratio.
    pub snr: f64,
    /// Diversity order `L`.
    pub diversity_l: u32,
}

impl ChannelSpec {
    pub fn new(snr: f64, diversity_l: u32) -> Result<Self> {
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(domain(format!("snr must be positive and finite, got {snr}")));
        }
        if diversity_l == 0 {
            return Err(domain("diversity order must be at least 1"));
        }
        Ok(Self { snr, diversity_l })
    }

    pub fn from_db(snr_db: f64, diversity_l: u32) -> Result<Self> {
        Self::new(db_to_linear(snr_db), diversity_l)
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.snr)
    }

    pub fn with_diversity(&self, diversity_l: u32) -> Result<Self> {
        Self::new(self.snr, diversity_l)
    }

    /// Mutual information of one codeword (bits/symbol) given its block gains.
    pub fn codeword_mi(&self, gains: &[f64]) -> f64 {
        gains.iter().map(|&g| (self.snr * g).ln_1p()).sum::<f64>()
            / (gains.len() as f64 * std::f64::consts::LN_2)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Mean and standard deviation of single-block mutual information, bits/symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiStats {
    pub snr: f64,
    pub mu_bits: f64,
    pub sigma_bits: f64,
}

// Exp(1) tail beyond this contributes < 1e-24 to either moment for snr <= 1e12.
const GAIN_CUTOFF: f64 = 70.0;

/// Moments of `log2(1 + snr·G)` for unit-mean exponential `G`, by adaptive quadrature.
pub fn mi_stats(snr: f64) -> Result<MiStats> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(domain(format!("mi_stats requires snr > 0, got {snr}")));
    }
    let ln2 = std::f64::consts::LN_2;
    // Break at the knee of the logarithm so the adaptive rule sees it.
    let knee = (1.0 / snr).min(1.0);
    let breaks = [0.0, knee, 1.0, 10.0, GAIN_CUTOFF];
    let expect = |h: &dyn Fn(f64) -> f64| {
        breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| integrate(|g| h(g) * (-g).exp(), w[0], w[1], 1e-300, 1e-13))
            .sum::<f64>()
    };
    let mi = |g: f64| (snr * g).ln_1p() / ln2;
    let mu = expect(&mi);
    let var = expect(&|g| (mi(g) - mu).powi(2));
    Ok(MiStats {
        snr,
        mu_bits: mu,
        sigma_bits: var.sqrt(),
    })
}

/// μ-normalized standard deviation of codeword mutual information, `σ/(μ√L)`.
pub fn kappa(stats: &MiStats, diversity_l: u32) -> f64 {
    stats.sigma_bits / (stats.mu_bits * f64::from(diversity_l).sqrt())
}
