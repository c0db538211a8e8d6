//! Traffic sources.

use serde::{Deserialize, Serialize};

use crate::model::FlowSpec;
use crate::time::SimTime;

/// How LDA flows offer traffic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LdaMode {
    /// Fixed-size packets evenly spaced at the flow's rate.
    #[default]
    Paced,
    /// The first-hop queue is refilled whenever a packet of the flow starts transmission,
    /// so the flow always has traffic waiting.
    Greedy,
}

/// Generation times of an LDA flow.
#[derive(Debug, Clone, PartialEq)]
pub enum LdaSchedule {
    Times(Vec<f64>),
    /// Driven by the queue; see [`LdaMode::Greedy`].
    Greedy,
}

/// Tick of the `k`-th periodic generation. Each tick is rounded on its own, so spacing
/// errors never accumulate.
pub fn periodic_tick(phase_s: f64, freq_hz: f64, k: u64) -> SimTime {
    SimTime::from_secs(phase_s + k as f64 / freq_hz)
}

/// `phase + k / mu` for `k = 0, 1, ...` while below `horizon_s`; empty when `mu = 0`.
pub fn periodic_source_events(flow: &FlowSpec, horizon_s: f64) -> Vec<f64> {
    let mu = flow.freq_hz.unwrap_or(0.0);
    evenly_spaced(flow.phase_s, mu, horizon_s)
}

pub fn lda_source_events(flow: &FlowSpec, mode: LdaMode, horizon_s: f64) -> LdaSchedule {
    match mode {
        LdaMode::Greedy => LdaSchedule::Greedy,
        LdaMode::Paced => {
            let rate = flow.rate_bps.unwrap_or(0.0);
            LdaSchedule::Times(evenly_spaced(flow.phase_s, rate / flow.size_bits, horizon_s))
        }
    }
}

fn evenly_spaced(phase_s: f64, freq: f64, horizon_s: f64) -> Vec<f64> {
    if !(freq > 0.0) {
        return Vec::new();
    }
    (0u64..)
        .map(|k| phase_s + k as f64 / freq)
        .take_while(|&t| t < horizon_s)
        .collect()
}

/// Smallest multiple of `t_i` that is at least `d_t`.
pub fn waiting_oracle_period(t_i: f64, d_t: f64) -> f64 {
    // guard against ratios like 3.0000000000000004
    let ratio = d_t / t_i;
    let k = (ratio - 1e-12 * ratio.max(1.0)).ceil().max(1.0);
    k * t_i
}
