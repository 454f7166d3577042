//! Support, switching structure and smoothness of control trajectories,
//! minimum-principle consistency, and the sparsity/smoothness tradeoff.

mod costate;
mod metrics;
mod sweep;

pub use costate::{costate_consistency, CostateCheck, COSTATE_TOLERANCE};
pub use metrics::{
    bangoffbang_score, channel_switching_times, derivative_supnorm, l0_measure, l0_per_channel, l1_cost, l2_cost,
    max_jump, misplaced_fractional_samples, quantize, switching_times, weighted_l0, HandsOffMetrics, DEFAULT_EPSILON,
};
pub use sweep::{log_spaced, sweep_tradeoff, TradeoffPoint};
