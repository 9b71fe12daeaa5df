//! Packet-level Monte Carlo simulation of ARQ with noisy acknowledgements and
//! of incremental-redundancy HARQ with restarts.
//!
//! Packets are split into chunks of [`CHUNK`] that run in parallel, each on its
//! own seeded substream. Chunk results are integer counters merged by
//! summation, so a run is bit-identical for a given seed whatever the thread
//! count.

use crate::arq_practical::{feedback_error_prob, DelayConstraint, FeedbackSpec};
use crate::channel_stats::ChannelSpec;
use crate::csv_cell::float_cell;
use crate::error::{domain, Error, Result};
use crate::harq::HarqSpec;
use crate::sampling::{fading_gain, substream, CHUNK};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::LN_2;

/// How forward decoding outcomes are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForwardMode {
    /// Each round fails independently with probability `eps`.
    Bernoulli { eps: f64 },
    /// Each round draws `L` fresh fades and fails when the codeword MI is at most the rate.
    FullFading,
}

/// Acknowledgement channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feedback {
    Ideal,
    Noisy(FeedbackSpec),
}

impl Feedback {
    /// Symbols spent on each acknowledgement.
    pub fn symbols(&self) -> u32 {
        match self {
            Feedback::Ideal => 0,
            Feedback::Noisy(fb) => fb.f,
        }
    }

    pub fn error_prob(&self) -> f64 {
        match self {
            Feedback::Ideal => 0.0,
            Feedback::Noisy(fb) => feedback_error_prob(fb),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub channel: ChannelSpec,
    /// Transmitted rate in bits/symbol; HARQ runs use `harq.r_init` instead.
    pub rate_bits: f64,
    pub dc: DelayConstraint,
    pub feedback: Feedback,
    pub harq: Option<HarqSpec>,
    pub forward: ForwardMode,
    pub packets: u64,
    pub seed: u64,
    /// Symbols per codeword.
    pub n: usize,
}

impl SimConfig {
    /// Ideal-feedback configuration with a practically unlimited round budget.
    pub fn ideal(channel: ChannelSpec, rate_bits: f64, forward: ForwardMode, packets: u64, seed: u64) -> Self {
        Self {
            channel,
            rate_bits,
            dc: DelayConstraint { d: u32::MAX, q: 0.5 },
            feedback: Feedback::Ideal,
            harq: None,
            forward,
            packets,
            seed,
            n: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.packets == 0 {
            return Err(domain("packet count must be positive"));
        }
        if self.n == 0 {
            return Err(domain("codeword length n must be positive"));
        }
        if self.dc.d == 0 {
            return Err(domain("round limit d must be at least 1"));
        }
        if !(self.rate_bits > 0.0 && self.rate_bits.is_finite()) {
            return Err(domain(format!("rate must be positive, got {}", self.rate_bits)));
        }
        if let ForwardMode::Bernoulli { eps } = self.forward {
            if !(0.0..=1.0).contains(&eps) {
                return Err(domain(format!("eps must lie in [0, 1], got {eps}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub packets_offered: u64,
    pub packets_delivered: u64,
    pub packets_lost: u64,
    pub total_rounds: u64,
    pub goodput_estimate: f64,
    pub goodput_stderr: f64,
    pub loss_rate: f64,
    pub loss_stderr: f64,
    pub mean_rounds: f64,
    pub rounds_stderr: f64,
    pub rate_bits: f64,
    pub n: usize,
    pub f: u32,
}

impl SimResult {
    pub const CSV_HEADER: [&'static str; 11] = [
        "packets_offered",
        "packets_delivered",
        "packets_lost",
        "total_rounds",
        "goodput",
        "goodput_stderr",
        "loss_rate",
        "loss_stderr",
        "mean_rounds",
        "rounds_stderr",
        "rate_bits",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.packets_offered.to_string(),
            self.packets_delivered.to_string(),
            self.packets_lost.to_string(),
            self.total_rounds.to_string(),
            float_cell(self.goodput_estimate),
            float_cell(self.goodput_stderr),
            float_cell(self.loss_rate),
            float_cell(self.loss_stderr),
            float_cell(self.mean_rounds),
            float_cell(self.rounds_stderr),
            float_cell(self.rate_bits),
        ]
    }

    /// `goodput·rounds·(n+f) - delivered·R·n`, zero up to rounding.
    pub fn accounting_residual(&self) -> f64 {
        let nf = self.n as f64 + f64::from(self.f);
        self.goodput_estimate * self.total_rounds as f64 * nf - self.packets_delivered as f64 * self.rate_bits * self.n as f64
    }
}

/// Integer counters; all moments needed for the standard errors.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    packets: u64,
    delivered: u64,
    rounds: u64,
    rounds_sq: u128,
    delivered_rounds: u64,
}

impl Tally {
    fn record(&mut self, delivered: bool, rounds: u64) {
        self.packets += 1;
        self.rounds += rounds;
        self.rounds_sq += u128::from(rounds) * u128::from(rounds);
        if delivered {
            self.delivered += 1;
            self.delivered_rounds += rounds;
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.packets += o.packets;
        self.delivered += o.delivered;
        self.rounds += o.rounds;
        self.rounds_sq += o.rounds_sq;
        self.delivered_rounds += o.delivered_rounds;
        self
    }

    fn finish(&self, rate_bits: f64, n: usize, f: u32) -> SimResult {
        let np = self.packets as f64;
        let s = self.delivered as f64;
        let t = self.rounds as f64;
        let scale = rate_bits * n as f64 / (n as f64 + f64::from(f));
        let ratio = s / t;
        let mean_t = t / np;
        // Σ(s_i - ρ t_i)² with s_i ∈ {0, 1}
        let resid = s - 2.0 * ratio * self.delivered_rounds as f64 + ratio * ratio * self.rounds_sq as f64;
        let denom = (np - 1.0).max(1.0);
        let loss = (self.packets - self.delivered) as f64 / np;
        let var_t = ((self.rounds_sq as f64 - t * mean_t) / denom).max(0.0);
        SimResult {
            packets_offered: self.packets,
            packets_delivered: self.delivered,
            packets_lost: self.packets - self.delivered,
            total_rounds: self.rounds,
            goodput_estimate: scale * ratio,
            goodput_stderr: scale * (resid.max(0.0) / denom / np).sqrt() / mean_t,
            loss_rate: loss,
            loss_stderr: (loss * (1.0 - loss) / np).sqrt(),
            mean_rounds: mean_t,
            rounds_stderr: (var_t / np).sqrt(),
            rate_bits,
            n,
            f,
        }
    }
}

fn run_chunks<F>(packets: u64, seed: u64, per_packet: F) -> Result<Tally>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(bool, u64)> + Sync,
{
    let chunk = CHUNK as u64;
    let chunks = packets.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, c);
            let len = chunk.min(packets - c * chunk);
            let mut tally = Tally::default();
            for _ in 0..len {
                let (ok, rounds) = per_packet(&mut rng)?;
                tally.record(ok, rounds);
            }
            Ok(tally)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

fn round_mi(rng: &mut ChaCha8Rng, spec: &ChannelSpec) -> f64 {
    let l = spec.diversity_l;
    let mut acc = 0.0;
    for _ in 0..l {
        acc += (spec.snr * fading_gain(rng)).ln_1p();
    }
    acc / (f64::from(l) * LN_2)
}

/// Simple ARQ with at most `d` rounds and possibly flipped acknowledgements.
///
/// Each round the receiver decodes afresh unless it already holds the packet,
/// then returns ACK or NACK; the acknowledgement is flipped with probability
/// `ε_fb`. A received ACK ends the packet (lost if it was never decoded); a
/// received NACK triggers another round, except after round `d`.
pub fn simulate_simple_arq(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    if cfg.harq.is_some() {
        return Err(domain("simple ARQ simulation takes no HARQ parameters"));
    }
    let eps_fb = cfg.feedback.error_prob();
    let d = u64::from(cfg.dc.d);
    let spec = cfg.channel;
    let rate = cfg.rate_bits;
    let forward = cfg.forward;
    let tally = run_chunks(cfg.packets, cfg.seed, |rng| {
        let mut decoded = false;
        let mut round = 0u64;
        loop {
            round += 1;
            if !decoded {
                decoded = match forward {
                    ForwardMode::Bernoulli { eps } => !rng.random_bool(eps),
                    ForwardMode::FullFading => round_mi(rng, &spec) > rate,
                };
            }
            let flipped = eps_fb > 0.0 && rng.random_bool(eps_fb);
            let ack = decoded != flipped;
            if ack || round >= d {
                return Ok((decoded, round));
            }
        }
    })?;
    Ok(tally.finish(rate, cfg.n, cfg.feedback.symbols()))
}

/// Attempts per packet after which a HARQ run is abandoned.
pub const MAX_HARQ_ATTEMPTS: u32 = 1_000_000;

/// HARQ with ideal feedback: attempts of up to `M` rounds restart until the
/// accumulated mutual information exceeds `R_init`.
pub fn simulate_harq(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let hs = cfg
        .harq
        .ok_or_else(|| domain("HARQ simulation needs HARQ parameters"))?;
    if cfg.feedback != Feedback::Ideal {
        return Err(domain("HARQ simulation assumes ideal feedback"));
    }
    if cfg.forward != ForwardMode::FullFading {
        return Err(domain("HARQ simulation needs full-fading forward mode"));
    }
    let spec = cfg.channel;
    let m = u64::from(hs.m_max);
    let tally = run_chunks(cfg.packets, cfg.seed, |rng| {
        let mut rounds = 0u64;
        for _ in 0..MAX_HARQ_ATTEMPTS {
            let mut cum = 0.0;
            for _ in 0..m {
                rounds += 1;
                cum += round_mi(rng, &spec);
                if cum > hs.r_init {
                    return Ok((true, rounds));
                }
            }
        }
        Err(Error::Infeasible(format!(
            "packet not delivered after {MAX_HARQ_ATTEMPTS} HARQ attempts at R_init = {}",
            hs.r_init
        )))
    })?;
    Ok(tally.finish(hs.r_init, cfg.n, 0))
}
