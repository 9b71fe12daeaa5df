//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

mod common;

use coding_arq::arq_practical::{
    expected_rounds, feedback_error_prob, joint_optimize_noisy_fb, loss_by_complement, loss_by_events,
    min_feedback_symbols, noisy_goodput_from_parts, packet_loss_prob, simplified_constraints_hold, DelayConstraint,
    FeedbackSpec,
};
use coding_arq::channel_stats::{db_to_linear, ChannelSpec};
use coding_arq::goodput_opt::{eps_star_l1_closed, goodput_with, optimize_eps, optimize_eps_with};
use coding_arq::harq::{harq_outage, optimize_initial_rate, HarqDraws, HarqSpec};
use coding_arq::mc_sim::{simulate_harq, simulate_simple_arq, Feedback, ForwardMode, SimConfig};
use coding_arq::outage::{outage_mc, OutageEvaluator, OutageModel, DEFAULT_OPT_SAMPLES, DEFAULT_OUTAGE_SAMPLES};
use common::enumerate_tree;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn spec(snr_db: f64, l: u32) -> ChannelSpec {
    ChannelSpec::from_db(snr_db, l).unwrap()
}

fn mc(seed: u64) -> OutageModel {
    OutageModel::monte_carlo(DEFAULT_OPT_SAMPLES, seed)
}

fn c1_l1_closed_form() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for db in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let s = spec(db, 1);
        let numeric = optimize_eps(&s, &OutageModel::ExactL1).map_err(|e| e.to_string())?.eps_star;
        let closed = eps_star_l1_closed(s.snr).map_err(|e| e.to_string())?;
        worst = worst.max((numeric - closed).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-4 && secs < 1.0,
        format!("max |diff| = {worst:.2e}, {secs:.3} s"),
        format!("max |diff| = {worst:.2e} (tol 1e-4), {secs:.3} s (limit 1 s)"),
    )
}

fn c2_monotonicity() -> Outcome {
    let start = Instant::now();
    let ls = [2u32, 5, 10];
    let mut table = vec![[0.0f64; 21]; ls.len()];
    for (li, &l) in ls.iter().enumerate() {
        for db in 0..=20 {
            let r = optimize_eps(&spec(f64::from(db), l), &mc(1)).map_err(|e| e.to_string())?;
            table[li][db as usize] = r.eps_star;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    for (li, row) in table.iter().enumerate() {
        for db in 1..=20 {
            if row[db] >= row[db - 1] {
                return Err(format!("L={} not decreasing at {db} dB: {} -> {}", ls[li], row[db - 1], row[db]));
            }
        }
    }
    for db in 0..=20 {
        for li in 1..ls.len() {
            if table[li][db] >= table[li - 1][db] {
                return Err(format!("not decreasing in L at {db} dB"));
            }
        }
    }
    check(secs < 120.0, format!("63 optima strictly ordered, {secs:.1} s"), format!("runtime {secs:.1} s > 120 s"))
}

fn c3_rate_star() -> Outcome {
    let r = optimize_eps(&spec(10.0, 5), &mc(3)).map_err(|e| e.to_string())?;
    check(
        (r.rate_star - 2.3).abs() <= 0.1,
        format!("rate* = {:.4} bits/symbol", r.rate_star),
        format!("rate* = {:.4}, expected 2.3 +- 0.1", r.rate_star),
    )
}

fn c4_near_optimal_tenth() -> Outcome {
    let mut worst = f64::MAX;
    let mut short = Vec::new();
    for l in [2u32, 10] {
        for db in [0.0, 10.0, 20.0] {
            let ev = OutageEvaluator::new(&spec(db, l), &mc(4)).map_err(|e| e.to_string())?;
            let best = optimize_eps_with(&ev, &mc(4)).map_err(|e| e.to_string())?;
            let ratio = goodput_with(&ev, 0.1).map_err(|e| e.to_string())? / best.goodput_star;
            if ratio < 0.93 {
                short.push(format!("L={l} {db} dB: {ratio:.3} (eps* = {:.3})", best.eps_star));
            }
            worst = worst.min(ratio);
        }
    }
    check(
        short.is_empty(),
        format!("worst ratio {worst:.4}"),
        format!("below 0.93 at {}", short.join("; ")),
    )
}

/// SNR (dB) at which goodput with ε = 0.001 reaches `target`.
fn snr_for_goodput(l: u32, target: f64) -> Result<f64, String> {
    let model = OutageModel::monte_carlo(DEFAULT_OUTAGE_SAMPLES, 5);
    let g = |db: f64| -> Result<f64, String> {
        let ev = OutageEvaluator::new(&spec(db, l), &model).map_err(|e| e.to_string())?;
        goodput_with(&ev, 1e-3).map_err(|e| e.to_string())
    };
    let (mut lo, mut hi) = (0.0, 40.0);
    if g(hi)? < target {
        return Err("goodput at eps = 0.001 never reaches the target below 40 dB".into());
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn c5_power_penalty() -> Outcome {
    let model = OutageModel::monte_carlo(DEFAULT_OUTAGE_SAMPLES, 5);
    let mut gaps = Vec::new();
    for (l, want, tol) in [(2u32, 10.0, 2.0), (10, 2.0, 1.0)] {
        let target = optimize_eps(&spec(10.0, l), &model).map_err(|e| e.to_string())?.goodput_star;
        let gap = snr_for_goodput(l, target)? - 10.0;
        if (gap - want).abs() > tol {
            return Err(format!("L={l}: gap {gap:.2} dB, expected {want} +- {tol}"));
        }
        gaps.push(format!("L={l}: {gap:.2} dB"));
    }
    Ok(gaps.join(", "))
}

fn c6_gaussian_fidelity() -> Outcome {
    let mut worst = (0.0f64, 0u32, 0);
    for l in [2u32, 5, 10] {
        for db in 0..=20 {
            let s = spec(f64::from(db), l);
            let g = optimize_eps(&s, &OutageModel::GaussianFading).map_err(|e| e.to_string())?.eps_star;
            let m = optimize_eps(&s, &mc(6)).map_err(|e| e.to_string())?.eps_star;
            if (g - m).abs() > worst.0 {
                worst = ((g - m).abs(), l, db);
            }
        }
    }
    check(
        worst.0 <= 0.05,
        format!("max |gap| = {:.4} (L={}, {} dB)", worst.0, worst.1, worst.2),
        format!("max |gap| = {:.4} at L={}, {} dB exceeds 0.05", worst.0, worst.1, worst.2),
    )
}

fn c7_feedback_integers() -> Outcome {
    let snr = db_to_linear(5.0);
    let a = min_feedback_symbols(snr, 1, 1e-3).map_err(|e| e.to_string())?;
    let b = min_feedback_symbols(snr, 2, 1e-3).map_err(|e| e.to_string())?;
    check(a == 79 && b == 9, format!("f = {a} (L_fb=1), f = {b} (L_fb=2)"), format!("got {a} and {b}, expected 79 and 9"))
}

fn c8_joint_design() -> Outcome {
    let s = spec(5.0, 3);
    let dc = DelayConstraint::new(3, 1e-6).unwrap();
    let d = joint_optimize_noisy_fb(&s, 2, &dc, 200, &mc(8)).map_err(|e| e.to_string())?;
    let feasible = d.xi_d <= dc.q && simplified_constraints_hold(d.eps, d.eps_fb, &dc);
    check(
        (29..=39).contains(&d.f) && (4e-3..=1.2e-2).contains(&d.eps) && feasible,
        format!("eps = {:.3e}, f = {}, eps_fb = {:.2e}, goodput = {:.4}", d.eps, d.f, d.eps_fb, d.goodput),
        format!("eps = {:.3e}, f = {}, eps_fb = {:.2e}, feasible = {feasible}", d.eps, d.f, d.eps_fb),
    )
}

fn c9_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_dual = 0.0f64;
    for _ in 0..10_000 {
        let e: f64 = rng.random();
        let efb: f64 = rng.random();
        let d = rng.random_range(1..=8);
        let a = loss_by_events(e, efb, d);
        let b = loss_by_complement(e, efb, d);
        worst_dual = worst_dual.max((a - b).abs());
        packet_loss_prob(e, efb, d).map_err(|e| e.to_string())?;
    }
    let mut worst_tree = 0.0f64;
    let grid = [0.0, 0.05, 0.3, 0.5, 0.77, 1.0];
    for d in 1..=6 {
        for &e in &grid {
            for &efb in &grid {
                let t = enumerate_tree(e, efb, d);
                let xi = packet_loss_prob(e, efb, d).map_err(|e| e.to_string())?;
                let ex = expected_rounds(e, efb, d).map_err(|e| e.to_string())?;
                worst_tree = worst_tree
                    .max((t.total - 1.0).abs())
                    .max((t.lost - xi).abs())
                    .max((t.round_weighted - ex).abs());
            }
        }
    }
    check(
        worst_dual <= 1e-12 && worst_tree <= 1e-12,
        format!("dual-form max diff {worst_dual:.1e}, tree max diff {worst_tree:.1e}"),
        format!("dual-form {worst_dual:.1e}, tree {worst_tree:.1e} (tol 1e-12)"),
    )
}

fn c10_simulator() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let eps = rng.random_range(0.05..0.5);
        let snr_fb = db_to_linear(rng.random_range(-5.0..5.0));
        let fb = FeedbackSpec::new(rng.random_range(1..6), rng.random_range(1..3), snr_fb).unwrap();
        let d = rng.random_range(1..6);
        let n = 200;
        let rate = rng.random_range(0.5..3.0);
        let eps_fb = feedback_error_prob(&fb);
        let cfg = SimConfig {
            dc: DelayConstraint::new(d, 0.5).unwrap(),
            feedback: Feedback::Noisy(fb),
            n,
            ..SimConfig::ideal(spec(10.0, 2), rate, ForwardMode::Bernoulli { eps }, 100_000, 100 + i)
        };
        let r = simulate_simple_arq(&cfg).map_err(|e| e.to_string())?;
        let xi = packet_loss_prob(eps, eps_fb, d).map_err(|e| e.to_string())?;
        let ex = expected_rounds(eps, eps_fb, d).map_err(|e| e.to_string())?;
        let g = noisy_goodput_from_parts(rate, eps, eps_fb, fb.f, d, n).map_err(|e| e.to_string())?;
        let loss_se = (xi * (1.0 - xi) / r.packets_offered as f64).sqrt();
        let z = [
            (r.loss_rate - xi).abs() / loss_se,
            (r.mean_rounds - ex).abs() / r.rounds_stderr,
            (r.goodput_estimate - g).abs() / r.goodput_stderr,
        ];
        if r.rounds_stderr == 0.0 && r.mean_rounds != ex {
            return Err(format!("config {i}: deterministic rounds {} vs {ex}", r.mean_rounds));
        }
        for (k, zk) in z.iter().enumerate() {
            if zk.is_nan() {
                // zero-variance statistic, equality was checked above
                continue;
            }
            if !(*zk <= 3.0) {
                return Err(format!("config {i}: statistic {k} off by {zk:.2} sigma"));
            }
            worst = worst.max(*zk);
        }
    }
    let s = spec(10.0, 2);
    let hs = HarqSpec::new(2, 4.5).unwrap();
    let cfg = SimConfig { harq: Some(hs), ..SimConfig::ideal(s, hs.r_init, ForwardMode::FullFading, 100_000, 11) };
    let sim = simulate_harq(&cfg).map_err(|e| e.to_string())?;
    let ana = HarqDraws::new(&s, 2, 400_000, 12).map_err(|e| e.to_string())?.goodput(hs.r_init);
    let zh = (sim.goodput_estimate - ana.value).abs() / (sim.goodput_stderr.powi(2) + ana.std_err.powi(2)).sqrt();
    check(
        zh <= 3.0,
        format!("worst ARQ z = {worst:.2}, HARQ z = {zh:.2}"),
        format!("HARQ goodput off by {zh:.2} sigma"),
    )
}

fn c11_harq() -> Outcome {
    let mut worst_z = 0.0f64;
    for db in [5.0, 10.0] {
        for l in [1u32, 2] {
            for m in [2u32, 3] {
                let s = spec(db, l);
                let wide = s.with_diversity(l * m).unwrap();
                for frac in [0.5, 0.8, 1.0, 1.2] {
                    let r = frac * f64::from(m) * coding_arq::mi_stats(s.snr).unwrap().mu_bits;
                    let a = harq_outage(&s, &HarqSpec::new(m, r).unwrap(), 200_000, 21).map_err(|e| e.to_string())?;
                    let b = outage_mc(&wide, r / f64::from(m), 200_000, 22).map_err(|e| e.to_string())?;
                    let se = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
                    if se == 0.0 {
                        if a.value != b.value {
                            return Err(format!("zero-variance mismatch at {db} dB, L={l}, M={m}"));
                        }
                        continue;
                    }
                    worst_z = worst_z.max((a.value - b.value).abs() / se);
                }
            }
        }
    }
    if worst_z > 3.0 {
        return Err(format!("post-HARQ outage identity off by {worst_z:.2} sigma"));
    }
    let mut worst_margin = f64::MAX;
    for db in [5.0, 10.0] {
        for l in [1u32, 2] {
            for m in [2u32, 3] {
                let o = optimize_initial_rate(&spec(db, l), m, DEFAULT_OPT_SAMPLES, 23).map_err(|e| e.to_string())?;
                if !o.bound_holds {
                    return Err(format!(
                        "bound violated at {db} dB, L={l}, M={m}: {} / {m} > {}",
                        o.r_init_star, o.bound_rate
                    ));
                }
                worst_margin = worst_margin.min(o.bound_rate - o.r_init_star / f64::from(m));
            }
        }
    }
    Ok(format!("identity worst z = {worst_z:.2}, smallest bound margin {worst_margin:.3} bits"))
}

fn c12_finite_blocklength() -> Outcome {
    let samples = DEFAULT_OPT_SAMPLES;
    let mut gaps = Vec::new();
    for l in [2u32, 10] {
        for db in [0.0, 5.0, 10.0] {
            let s = spec(db, l);
            let fin = optimize_eps(&s, &OutageModel::FiniteBlocklength { n: 200, samples, seed: 12 })
                .map_err(|e| e.to_string())?
                .eps_star;
            let inf = optimize_eps(&s, &OutageModel::monte_carlo(samples, 12)).map_err(|e| e.to_string())?.eps_star;
            if fin < inf {
                return Err(format!("L={l}, {db} dB: eps*(200) = {fin:.4} < eps*(inf) = {inf:.4}"));
            }
            if l == 10 {
                gaps.push(fin - inf);
            }
        }
    }
    check(
        gaps.windows(2).all(|w| w[1] < w[0]),
        format!("L=10 gaps at 0/5/10 dB: {:.4}, {:.4}, {:.4}", gaps[0], gaps[1], gaps[2]),
        format!("L=10 gaps not shrinking: {gaps:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("1 single-block closed form", c1_l1_closed_form),
        ("2 optimum decreasing in SNR and L", c2_monotonicity),
        ("3 optimal rate at L=5, 10 dB", c3_rate_star),
        ("4 eps=0.1 near-optimal", c4_near_optimal_tenth),
        ("5 power penalty of eps=0.001", c5_power_penalty),
        ("6 Gaussian model fidelity", c6_gaussian_fidelity),
        ("7 feedback symbol counts", c7_feedback_integers),
        ("8 joint noisy-feedback design", c8_joint_design),
        ("9 loss and rounds identities", c9_identities),
        ("10 simulator vs analytics", c10_simulator),
        ("11 HARQ identities and bound", c11_harq),
        ("12 finite blocklength optimum", c12_finite_blocklength),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS  criterion {name}: {msg} [{secs:.1} s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  criterion {name}: {msg} [{secs:.1} s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
