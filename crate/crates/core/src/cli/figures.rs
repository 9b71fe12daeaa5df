//! Sweep data behind each figure. Rows come out in a fixed parameter order.

use super::{row, Failure, Table};
use crate::arq_practical::{reliable_phy_goodput, joint_optimize_noisy_fb, DelayConstraint, FeedbackDesigner};
use crate::channel_stats::ChannelSpec;
use crate::goodput_opt::{goodput_with, optimize_eps, optimize_eps_with};
use crate::harq::HarqDraws;
use crate::outage::{OutageEvaluator, OutageModel};
use clap::ValueEnum;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig8,
    Fig9,
    Fig10,
}

impl FigureId {
    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
            FigureId::Fig10 => "fig10",
        }
    }
}

type Outcome = Result<Table, Failure>;

fn ch(db: f64, l: u32) -> Result<ChannelSpec, Failure> {
    Ok(ChannelSpec::from_db(db, l)?)
}

pub(super) fn build(id: FigureId, samples: usize, seed: u64) -> Outcome {
    let mc = OutageModel::monte_carlo(samples, seed);
    match id {
        FigureId::Fig2 => fig2(mc),
        FigureId::Fig3 => fig3(mc),
        FigureId::Fig4 => fig4(mc),
        FigureId::Fig5 => finite_n(samples, seed, false),
        FigureId::Fig6 => finite_n(samples, seed, true),
        FigureId::Fig8 => fig8(mc),
        FigureId::Fig9 => fig9(mc),
        FigureId::Fig10 => fig10(samples, seed),
    }
}

// ε* versus SNR, Monte Carlo and Gaussian model
fn fig2(mc: OutageModel) -> Outcome {
    let mut t = Table::new(&["snr_db", "L", "eps_star_exactish", "eps_star_gaussian"]);
    for l in [2u32, 5, 10] {
        for db in 0..=20 {
            let s = ch(f64::from(db), l)?;
            let a = optimize_eps(&s, &mc)?.eps_star;
            let g = optimize_eps(&s, &OutageModel::GaussianFading)?.eps_star;
            t.push(row![db, l, a, g]);
        }
    }
    Ok(t)
}

// success probability and goodput versus rate at 10 dB
fn fig3(mc: OutageModel) -> Outcome {
    let mut t = Table::new(&["L", "rate_bits", "success_prob", "goodput"]);
    for l in [1u32, 2, 5, 10] {
        let ev = OutageEvaluator::new(&ch(10.0, l)?, &mc)?;
        for i in 1..=120 {
            let r = 0.05 * f64::from(i);
            let p = 1.0 - ev.outage(r);
            t.push(row![l, r, p, r * p]);
        }
    }
    Ok(t)
}

// goodput versus SNR at fixed ε and at ε*
fn fig4(mc: OutageModel) -> Outcome {
    let mut t = Table::new(&["snr_db", "L", "eps_label", "eps", "goodput"]);
    for l in [2u32, 10] {
        for db in (0..=30).step_by(2) {
            let ev = OutageEvaluator::new(&ch(f64::from(db), l)?, &mc)?;
            for (label, e) in [("0.1", 0.1), ("0.01", 0.01), ("0.001", 0.001)] {
                t.push(row![db, l, label, e, goodput_with(&ev, e)?]);
            }
            let best = optimize_eps_with(&ev, &mc)?;
            t.push(row![db, l, "opt", best.eps_star, best.goodput_star]);
        }
    }
    Ok(t)
}

// finite blocklength: ε* (fig5) or optimal goodput (fig6) versus SNR
fn finite_n(samples: usize, seed: u64, goodput: bool) -> Outcome {
    let value = if goodput { "goodput_star" } else { "eps_star" };
    let mut t = Table::new(&["snr_db", "L", "n", value]);
    for l in [2u32, 10] {
        for db in (0..=20).step_by(2) {
            let s = ch(f64::from(db), l)?;
            for n in [Some(200usize), Some(1000), None] {
                let model = match n {
                    Some(n) => OutageModel::FiniteBlocklength { n, samples, seed },
                    None => OutageModel::monte_carlo(samples, seed),
                };
                let r = optimize_eps(&s, &model)?;
                let v = if goodput { r.goodput_star } else { r.eps_star };
                let n_col = n.map_or_else(|| "inf".to_string(), |n| n.to_string());
                t.push(row![db, l, n_col, v]);
            }
        }
    }
    Ok(t)
}

// noisy feedback: best f and goodput along the ε grid
fn fig8(mc: OutageModel) -> Outcome {
    let s = ch(5.0, 3)?;
    let dc = DelayConstraint::new(3, 1e-6)?;
    let mut t = Table::new(&["l_fb", "eps", "f", "eps_fb", "xi_d", "goodput"]);
    for l_fb in [1u32, 2] {
        let designer = FeedbackDesigner::new(&s, l_fb, &dc, 200, &mc)?;
        for eps in designer.eps_grid() {
            match designer.best_for_eps(eps)? {
                Some(x) => t.push(row![l_fb, eps, x.f, x.eps_fb, x.xi_d, x.goodput]),
                None => t.push(row![l_fb, eps, "", "", "", ""]),
            }
        }
    }
    Ok(t)
}

// joint design versus SNR against the reliable-PHY alternative
fn fig9(mc: OutageModel) -> Outcome {
    let dc = DelayConstraint::new(3, 1e-6)?;
    let mut t = Table::new(&["snr_db", "l_fb", "eps", "f", "eps_fb", "goodput", "reliable_phy_goodput"]);
    for l_fb in [1u32, 2] {
        for db in (0..=20).step_by(2) {
            let s = ch(f64::from(db), 3)?;
            let x = joint_optimize_noisy_fb(&s, l_fb, &dc, 200, &mc)?;
            let base = reliable_phy_goodput(&s, l_fb, &dc, 200, &mc)?;
            t.push(row![db, l_fb, x.eps, x.f, x.eps_fb, x.goodput, base]);
        }
    }
    Ok(t)
}

// HARQ (M > 1) against simple ARQ (M = 1) versus initial rate
fn fig10(samples: usize, seed: u64) -> Outcome {
    let s = ch(10.0, 2)?;
    let mut t = Table::new(&["M", "r_init", "goodput", "goodput_stderr"]);
    for m in [1u32, 2, 3] {
        let draws = HarqDraws::new(&s, m, samples, seed)?;
        for i in 1..=100 {
            let r = 0.1 * f64::from(i);
            let g = draws.goodput(r);
            t.push(row![m, r, g.value, g.std_err]);
        }
    }
    Ok(t)
}
