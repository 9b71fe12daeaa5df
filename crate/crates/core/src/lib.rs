//! Coding versus ARQ tradeoff in Rayleigh block-fading channels.
//!
//! The crate computes packet error (outage) probabilities for codewords that
//! span `L` independently faded blocks, finds the PHY error probability that
//! maximizes goodput under ideal and practical ARQ conditions (CRC overhead,
//! delay limits, noisy acknowledgements, incremental-redundancy HARQ), and
//! ships a discrete-event simulator that checks every analytic result from
//! first principles.

pub mod arq_practical;
pub mod channel_stats;
pub mod cli;
pub mod csv_cell;
pub mod error;
pub mod goodput_opt;
pub mod harq;
pub mod mc_sim;
pub mod outage;
mod quadrature;
pub mod sampling;
pub mod search;
pub mod special;

pub use channel_stats::{kappa, mi_stats, ChannelSpec, MiStats};
pub use error::{Error, Result};
pub use outage::{Estimate, InverseRate, OutageEvaluator, OutageModel, RateEpsPoint};
pub use goodput_opt::{goodput, optimize_eps, GoodputReport};
