//! Command-line front end. Every command writes CSV: one `#` comment line
//! (version, command, seed, samples), a header row, then data rows.

mod config;
mod figures;

pub use config::ExperimentConfig;

use crate::arq_practical::{
    crc_joint_optimize, delay_constrained_optimize, feedback_error_prob, joint_optimize_noisy_fb,
    min_feedback_symbols, reliable_phy_goodput, DelayConstraint, FeedbackSpec,
};
use crate::channel_stats::{kappa, mi_stats, ChannelSpec};
use crate::error::Error;
use crate::goodput_opt::optimize_eps;
use crate::harq::{optimize_initial_rate, HarqDraws, HarqSpec};
use crate::mc_sim::{simulate_harq, simulate_simple_arq, Feedback, ForwardMode, SimConfig, SimResult};
use crate::outage::{outage_finite_n, outage_mc, OutageEvaluator, OutageModel, DEFAULT_OPT_SAMPLES, DEFAULT_OUTAGE_SAMPLES};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "coding-arq", version, about = "Coding versus ARQ goodput in Rayleigh block fading", args_override_self = true)]
struct Cli {
    /// key = value file with default flags; command-line flags win
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct ChannelArgs {
    /// Average SNR in dB; a comma-separated list gives one row per value
    #[arg(long = "snr-db", value_delimiter = ',', default_value = "10", allow_negative_numbers = true, action = clap::ArgAction::Set)]
    snr_db: Vec<f64>,

    /// Fading blocks per codeword
    #[arg(long, short = 'L', default_value_t = 2)]
    diversity: u32,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Monte Carlo sample count (command-specific default)
    #[arg(long)]
    samples: Option<usize>,

    /// Write CSV here instead of standard output
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Mc)]
    model: ModelKind,

    /// Symbols per codeword
    #[arg(long, default_value_t = 200)]
    n: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModelKind {
    Exact,
    Gaussian,
    Mc,
    Finite,
}

impl ModelArgs {
    fn model(&self, samples: usize, seed: u64) -> OutageModel {
        match self.model {
            ModelKind::Exact => OutageModel::ExactL1,
            ModelKind::Gaussian => OutageModel::GaussianFading,
            ModelKind::Mc => OutageModel::MonteCarlo { samples, seed },
            ModelKind::Finite => OutageModel::FiniteBlocklength { n: self.n, samples, seed },
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Mean and spread of per-block mutual information
    Stats {
        #[command(flatten)]
        ch: ChannelArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Outage probability at a fixed rate
    Outage {
        #[command(flatten)]
        ch: ChannelArgs,
        #[command(flatten)]
        m: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Transmitted rate, bits/symbol
        #[arg(long)]
        rate: f64,
    },
    /// Goodput-maximizing error probability
    Optimize {
        #[command(flatten)]
        ch: ChannelArgs,
        #[command(flatten)]
        m: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Joint error probability and CRC length under an undetected-error bound
    Crc {
        #[command(flatten)]
        ch: ChannelArgs,
        #[command(flatten)]
        m: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Undetected-error bound
        #[arg(long)]
        p: f64,
    },
    /// Optimum under a round limit and loss bound
    Delay {
        #[command(flatten)]
        ch: ChannelArgs,
        #[command(flatten)]
        m: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        q: f64,
    },
    /// Acknowledgement error probability, or the joint design with --joint
    Feedback {
        #[command(flatten)]
        ch: ChannelArgs,
        #[command(flatten)]
        m: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Feedback diversity order
        #[arg(long = "l-fb", default_value_t = 1)]
        l_fb: u32,
        /// Feedback symbols per packet
        #[arg(long, conflicts_with_all = ["target", "joint"])]
        f: Option<u32>,
        /// Report the smallest f reaching this feedback error probability
        #[arg(long, conflicts_with = "joint")]
        target: Option<f64>,
        /// Optimize forward error probability and f together
        #[arg(long)]
        joint: bool,
        #[arg(long, default_value_t = 3)]
        d: u32,
        #[arg(long, default_value_t = 1e-6)]
        q: f64,
    },
    /// Incremental-redundancy HARQ; optimizes the initial rate when --rate is absent
    Harq {
        #[command(flatten)]
        ch: ChannelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Maximum rounds per attempt
        #[arg(long, default_value_t = 2)]
        m: u32,
        /// Initial rate, bits/symbol
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Packet-level protocol simulation
    Simulate {
        #[command(flatten)]
        ch: ChannelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = SimMode::Arq)]
        mode: SimMode,
        /// Transmitted (or initial HARQ) rate, bits/symbol
        #[arg(long)]
        rate: f64,
        /// Draw decoding failures with this probability instead of from fading
        #[arg(long)]
        eps: Option<f64>,
        /// Round limit per packet (simple ARQ)
        #[arg(long, default_value_t = u32::MAX)]
        d: u32,
        /// Feedback symbols; ideal feedback when absent
        #[arg(long)]
        f: Option<u32>,
        #[arg(long = "l-fb", default_value_t = 1)]
        l_fb: u32,
        /// HARQ rounds per attempt
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        packets: u64,
    },
    /// Sweep data for a figure
    Figure {
        #[arg(value_enum)]
        id: figures::FigureId,
        #[command(flatten)]
        run: RunArgs,
    },
}

/// Why a command failed, with its exit code.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Infeasible(String),
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Internal(_) => 1,
        }
    }

    fn report(&self) -> String {
        match self {
            Failure::Invalid(m) => format!("error[invalid-input]: {m}"),
            Failure::Infeasible(m) => format!("error[infeasible]: {m}"),
            Failure::Internal(m) => format!("error[internal]: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Precondition(_) => Failure::Invalid(e.to_string()),
            Error::Infeasible(_) => Failure::Infeasible(e.to_string()),
            Error::Consistency(_) => Failure::Internal(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Rows collected by a command before writing.
pub(crate) struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub(crate) fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub(crate) fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Formats anything displayable into a CSV cell.
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::csv_cell::Cell::cell(&$x)),*] };
}
pub(crate) use row;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_command<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match with_config(args) {
        Ok(a) => a,
        Err(f) => {
            eprintln!("{}", f.report());
            return f.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    print!("{e}");
                    0
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
                    eprintln!("error[invalid-input]: {first}");
                    2
                }
            };
        }
    };
    match execute(cli.cmd) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", f.report());
            f.exit_code()
        }
    }
}

/// Splices flags from a `--config` file in front of the user's own flags so
/// that the latter override them.
fn with_config(args: Vec<OsString>) -> Outcome<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let cfg = ExperimentConfig::from_file(path.as_ref())?;

    let cmd = Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    let pos = strs.iter().position(|a| names.contains(a));
    let (sub, mut out) = match pos {
        Some(p) => (strs[p].clone(), args[..=p].to_vec()),
        None => {
            let c = cfg
                .command
                .clone()
                .ok_or_else(|| Failure::Invalid("no subcommand given and the config names none".into()))?;
            if !names.contains(&c) {
                return Err(Failure::Invalid(format!("config names unknown command '{c}'")));
            }
            let mut head = args.clone();
            head.push(c.clone().into());
            (c, head)
        }
    };
    let known = |sc: &clap::Command, key: &str| sc.get_arguments().any(|a| a.get_long() == Some(key));
    let target = cmd.find_subcommand(&sub).expect("subcommand exists");
    let mut filtered = ExperimentConfig::default();
    for (k, v) in &cfg.values {
        if known(target, k) {
            filtered.values.insert(k.clone(), v.clone());
        } else if !cmd.get_subcommands().any(|sc| known(sc, k)) {
            return Err(Failure::Invalid(format!("config key '{k}' is not a flag of any command")));
        }
    }
    out.extend(filtered.to_flags().into_iter().map(OsString::from));
    if let Some(p) = pos {
        out.extend(args[p + 1..].iter().cloned());
    }
    Ok(out)
}

fn open_output(path: &Option<PathBuf>) -> Outcome<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::Invalid(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(run: &RunArgs, command: &str, samples: Option<usize>, table: &Table) -> Outcome<()> {
    let mut out = open_output(&run.output)?;
    let samples = samples.map_or_else(|| "none".to_string(), |s| s.to_string());
    writeln!(out, "# coding-arq {VERSION} command={command} seed={} samples={samples}", run.seed)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn channels(ch: &ChannelArgs) -> Outcome<Vec<ChannelSpec>> {
    ch.snr_db
        .iter()
        .map(|&db| {
            if !db.is_finite() {
                return Err(Failure::Invalid(format!("snr-db must be finite, got {db}")));
            }
            Ok(ChannelSpec::from_db(db, ch.diversity)?)
        })
        .collect()
}

fn uses_samples(m: &ModelArgs) -> bool {
    matches!(m.model, ModelKind::Mc | ModelKind::Finite)
}

fn execute(cmd: Cmd) -> Outcome<()> {
    match cmd {
        Cmd::Stats { ch, run } => {
            let mut t = Table::new(&["snr_db", "L", "mu_bits", "sigma_bits", "kappa"]);
            for (s, &db) in channels(&ch)?.iter().zip(&ch.snr_db) {
                let st = mi_stats(s.snr)?;
                t.push(row![db, s.diversity_l, st.mu_bits, st.sigma_bits, kappa(&st, s.diversity_l)]);
            }
            emit(&run, "stats", None, &t)
        }
        Cmd::Outage { ch, m, run, rate } => {
            let samples = run.samples.unwrap_or(DEFAULT_OUTAGE_SAMPLES);
            let mut t = Table::new(&["snr_db", "L", "rate_bits", "model", "outage", "std_err"]);
            for (s, &db) in channels(&ch)?.iter().zip(&ch.snr_db) {
                let model = m.model(samples, run.seed);
                let (v, se) = match model {
                    OutageModel::MonteCarlo { samples, seed } => {
                        let e = outage_mc(s, rate, samples, seed)?;
                        (e.value, e.std_err)
                    }
                    OutageModel::FiniteBlocklength { n, samples, seed } => {
                        let e = outage_finite_n(s, rate, n, samples, seed)?;
                        (e.value, e.std_err)
                    }
                    _ => (OutageEvaluator::new(s, &model)?.outage(rate), 0.0),
                };
                t.push(row![db, s.diversity_l, rate, model.name(), v, se]);
            }
            emit(&run, "outage", uses_samples(&m).then_some(samples), &t)
        }
        Cmd::Optimize { ch, m, run } => {
            let samples = run.samples.unwrap_or(DEFAULT_OPT_SAMPLES);
            let mut t = Table::new(&[
                "snr_db", "L", "model", "eps_star", "rate_star", "goodput_star", "iterations", "unimodal",
            ]);
            for (s, &db) in channels(&ch)?.iter().zip(&ch.snr_db) {
                let r = optimize_eps(s, &m.model(samples, run.seed))?;
                if !r.unimodal {
                    eprintln!("warning[non-unimodal]: goodput not unimodal at snr_db={db}");
                }
                t.push(row![db, s.diversity_l, r.model.name(), r.eps_star, r.rate_star, r.goodput_star, r.iterations, r.unimodal]);
            }
            emit(&run, "optimize", uses_samples(&m).then_some(samples), &t)
        }
        Cmd::Crc { ch, m, run, p } => {
            let samples = run.samples.unwrap_or(DEFAULT_OPT_SAMPLES);
            let mut t = Table::new(&[
                "snr_db", "L", "n", "p", "k_star", "eps_star", "rate_bits", "effective_goodput", "eps_unconstrained", "k_rule",
            ]);
            for (s, &db) in channels(&ch)?.iter().zip(&ch.snr_db) {
                let d = crc_joint_optimize(s, m.n, p, &m.model(samples, run.seed))?;
                t.push(row![db, s.diversity_l, m.n, p, d.k_star, d.eps_star, d.rate_bits, d.effective_goodput, d.eps_unconstrained, d.k_rule]);
            }
            emit(&run, "crc", uses_samples(&m).then_some(samples), &t)
        }
        Cmd::Delay { ch, m, run, d, q } => {
            let samples = run.samples.unwrap_or(DEFAULT_OPT_SAMPLES);
            let dc = DelayConstraint::new(d, q)?;
            let mut t = Table::new(&["snr_db", "L", "d", "q", "eps_cap", "eps_star", "rate_star", "goodput_star"]);
            for (s, &db) in channels(&ch)?.iter().zip(&ch.snr_db) {
                let r = delay_constrained_optimize(s, &dc, &m.model(samples, run.seed))?;
                t.push(row![db, s.diversity_l, d, q, dc.eps_cap(), r.eps_star, r.rate_star, r.goodput_star]);
            }
            emit(&run, "delay", uses_samples(&m).then_some(samples), &t)
        }
        Cmd::Feedback { ch, m, run, l_fb, f, target, joint, d, q } => {
            let specs = channels(&ch)?;
            if joint {
                let samples = run.samples.unwrap_or(DEFAULT_OPT_SAMPLES);
                let dc = DelayConstraint::new(d, q)?;
                let mut t = Table::new(&[
                    "snr_db", "L", "l_fb", "n", "d", "q", "eps", "f", "eps_fb", "xi_d", "expected_rounds", "goodput",
                    "reliable_phy_goodput",
                ]);
                for (s, &db) in specs.iter().zip(&ch.snr_db) {
                    let model = m.model(samples, run.seed);
                    let x = joint_optimize_noisy_fb(s, l_fb, &dc, m.n, &model)?;
                    let base = reliable_phy_goodput(s, l_fb, &dc, m.n, &model)?;
                    t.push(row![db, s.diversity_l, l_fb, m.n, d, q, x.eps, x.f, x.eps_fb, x.xi_d, x.expected_rounds, x.goodput, base]);
                }
                return emit(&run, "feedback", uses_samples(&m).then_some(samples), &t);
            }
            let mut t = Table::new(&["snr_db", "l_fb", "f", "eps_fb"]);
            for (s, &db) in specs.iter().zip(&ch.snr_db) {
                let f = match (f, target) {
                    (Some(f), _) => f,
                    (None, Some(tg)) => min_feedback_symbols(s.snr, l_fb, tg)?,
                    (None, None) => return Err(Failure::Invalid("feedback needs --f, --target or --joint".into())),
                };
                let fb = FeedbackSpec::new(f, l_fb, s.snr)?;
                t.push(row![db, l_fb, f, feedback_error_prob(&fb)]);
            }
            emit(&run, "feedback", None, &t)
        }
        Cmd::Harq { ch, run, m, rate } => {
            let samples = run.samples.unwrap_or(DEFAULT_OPT_SAMPLES);
            let mut t = Table::new(&[
                "snr_db", "L", "M", "r_init", "outage", "outage_stderr", "expected_rounds", "goodput", "goodput_stderr",
                "optimized", "bound_rate", "bound_holds",
            ]);
            for (s, &db) in channels(&ch)?.iter().zip(&ch.snr_db) {
                let (r_init, bound) = match rate {
                    Some(r) => (HarqSpec::new(m, r)?.r_init, None),
                    None => {
                        let o = optimize_initial_rate(s, m, samples, run.seed)?;
                        (o.r_init_star, Some((o.bound_rate, o.bound_holds)))
                    }
                };
                let draws = HarqDraws::new(s, m, samples, run.seed)?;
                let out = draws.outage(r_init);
                let g = draws.goodput(r_init);
                let (br, bh) = bound.map_or((String::new(), String::new()), |(r, h)| (r.to_string(), h.to_string()));
                t.push(row![
                    db, s.diversity_l, m, r_init, out.value, out.std_err, draws.expected_rounds(r_init).value, g.value,
                    g.std_err, bound.is_some(), br, bh,
                ]);
            }
            emit(&run, "harq", Some(samples), &t)
        }
        Cmd::Simulate { ch, run, mode, rate, eps, d, f, l_fb, m, n, packets } => {
            let mut header = vec!["mode", "snr_db", "L", "forward", "d", "f", "l_fb", "eps_fb", "M"];
            header.extend(SimResult::CSV_HEADER);
            let mut t = Table::new(&header);
            let dc = DelayConstraint { d, q: 0.5 };
            if d == 0 {
                return Err(Failure::Invalid("round limit d must be at least 1".into()));
            }
            for (s, &db) in channels(&ch)?.iter().zip(&ch.snr_db) {
                let feedback = match f {
                    Some(f) => Feedback::Noisy(FeedbackSpec::new(f, l_fb, s.snr)?),
                    None => Feedback::Ideal,
                };
                let forward = match eps {
                    Some(e) => ForwardMode::Bernoulli { eps: e },
                    None => ForwardMode::FullFading,
                };
                let base = SimConfig { dc, feedback, n, ..SimConfig::ideal(*s, rate, forward, packets, run.seed) };
                let (res, m_col) = match mode {
                    SimMode::Arq => (simulate_simple_arq(&base)?, String::new()),
                    SimMode::Harq => {
                        let cfg = SimConfig { harq: Some(HarqSpec::new(m, rate)?), ..base };
                        (simulate_harq(&cfg)?, m.to_string())
                    }
                };
                let fwd = eps.map_or_else(|| "fading".to_string(), |e| e.to_string());
                let d_col = if d == u32::MAX { "inf".to_string() } else { d.to_string() };
                let mut r = row![
                    mode.name(), db, s.diversity_l, fwd, d_col, feedback.symbols(), l_fb, feedback.error_prob(), m_col,
                ];
                r.extend(res.csv_record());
                t.push(r);
            }
            emit(&run, "simulate", Some(packets as usize), &t)
        }
        Cmd::Figure { id, run } => {
            let samples = run.samples.unwrap_or(DEFAULT_OPT_SAMPLES);
            let t = figures::build(id, samples, run.seed)?;
            emit(&run, &format!("figure {}", id.name()), Some(samples), &t)
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SimMode {
    Arq,
    Harq,
}

impl SimMode {
    fn name(&self) -> &'static str {
        match self {
            SimMode::Arq => "arq",
            SimMode::Harq => "harq",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn failure_codes() {
        assert_eq!(Failure::from(Error::Domain("x".into())).exit_code(), 2);
        assert_eq!(Failure::from(Error::Precondition("x".into())).exit_code(), 2);
        assert_eq!(Failure::from(Error::Infeasible("x".into())).exit_code(), 3);
    }
}
