//! Deterministic discrete-event simulation of store-and-forward networks.
//!
//! Every link is an output port at its source node with its own queueing discipline.
//! Packets are transmitted whole (`size / capacity`), then propagate for the link
//! latency before arriving at the next port or at their destination.
//!
//! Time is an integer count of picoseconds. Simultaneous events are ordered by
//! `(time, node, kind, flow or port, insertion)`, with arrivals and generations ranked
//! before transmission starts and completions, so a packet arriving at the instant a
//! port frees up is eligible for that port's next transmission.

mod engine;
pub mod measure;
pub mod report;
pub mod source;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aaq::ReplacePolicy;
use crate::model::{validate_network, FlowClass, FlowSpec, LinkId, Network};
use crate::opt::aoi_ratio;

pub use engine::{run, run_detailed, SimRun, TraceRecord};
pub use measure::{
    decompose_age, measure_aoi, measure_throughput, AgeDecomposition, Delivery, MeasureError,
    Window,
};
pub use report::{FlowReport, LinkStats, SimReport};
pub use source::{
    lda_source_events, periodic_source_events, periodic_tick, waiting_oracle_period, LdaMode,
    LdaSchedule,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("event limit of {0} exceeded")]
    EventOverflow(u64),
    #[error("flow `{0}` has zero update frequency under the per-flow share scheduler")]
    ZeroFrequency(String),
}

/// Output-port discipline, applied at every port of the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchedulerKind {
    /// AoI-aware queueing with the byte-budget scheduler.
    Sdm,
    /// AoI-aware queueing with alternating phases; `None` picks 20 of the port's largest
    /// transmission times per frame.
    Tdm { frame_s: Option<f64> },
    /// One drop-tail FIFO shared by both classes.
    Fifo,
    /// IFIL for AoI with strict priority over the LDA FIFO.
    PriorityAoi,
    /// Starts transmissions only at multiples of `period_s`, newest AoI packet first;
    /// `None` derives the period from the port's AoI flows with
    /// [`waiting_oracle_period`].
    WaitingOracle { period_s: Option<f64> },
    /// The port is split into parallel lanes: each AoI flow gets its planned share
    /// `c mu_f s_f / (S_LDA + S_AoI)` of the link with a single newest-wins slot, and LDA
    /// traffic uses whatever capacity is left.
    PerFlowShare,
}

impl SchedulerKind {
    /// Accepts `sdm`, `tdm[:FRAME_S]`, `fifo`, `priority`, `oracle[:PERIOD_S]` and
    /// `per_flow_share`.
    pub fn parse(name: &str) -> Option<Self> {
        let lower = name.to_ascii_lowercase().replace('-', "_");
        let (head, arg) = match lower.split_once(':') {
            Some((h, a)) => (h.to_owned(), Some(a.parse::<f64>().ok().filter(|v| *v > 0.0)?)),
            None => (lower, None),
        };
        Some(match head.as_str() {
            "sdm" => SchedulerKind::Sdm,
            "tdm" => SchedulerKind::Tdm { frame_s: arg },
            "fifo" if arg.is_none() => SchedulerKind::Fifo,
            "priority" | "priority_aoi" if arg.is_none() => SchedulerKind::PriorityAoi,
            "oracle" | "waiting_oracle" => SchedulerKind::WaitingOracle { period_s: arg },
            "per_flow_share" | "share" if arg.is_none() => SchedulerKind::PerFlowShare,
            _ => return None,
        })
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchedulerKind::Sdm => f.write_str("sdm"),
            SchedulerKind::Tdm { frame_s: None } => f.write_str("tdm"),
            SchedulerKind::Tdm { frame_s: Some(t) } => write!(f, "tdm:{t}"),
            SchedulerKind::Fifo => f.write_str("fifo"),
            SchedulerKind::PriorityAoi => f.write_str("priority"),
            SchedulerKind::WaitingOracle { period_s: None } => f.write_str("oracle"),
            SchedulerKind::WaitingOracle { period_s: Some(t) } => write!(f, "oracle:{t}"),
            SchedulerKind::PerFlowShare => f.write_str("per_flow_share"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub duration_s: f64,
    /// Defaults to a tenth of the duration.
    pub warmup_s: Option<f64>,
    pub seed: u64,
    pub lda_mode: LdaMode,
    /// Tail-drop bound of each LDA (or shared) FIFO; defaults to 100 of the largest
    /// packets crossing the port.
    pub fifo_max_bytes: Option<f64>,
    /// Most distinct flows an IFIL queue holds.
    pub ifil_capacity: Option<usize>,
    pub replace_policy: ReplacePolicy,
    /// Draw each source's phase uniformly within one period from `seed`.
    pub randomize_phases: bool,
    pub max_events: u64,
    pub trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration_s: 1.0,
            warmup_s: None,
            seed: 0,
            lda_mode: LdaMode::Paced,
            fifo_max_bytes: None,
            ifil_capacity: None,
            replace_policy: ReplacePolicy::InPlace,
            randomize_phases: false,
            max_events: 200_000_000,
            trace: false,
        }
    }
}

impl SimConfig {
    pub fn warmup(&self) -> f64 {
        self.warmup_s.unwrap_or(0.1 * self.duration_s)
    }
}

/// Everything a run needs. Flows carry their allocated `rate_bps` / `freq_hz`.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: Network,
    pub flows: Vec<FlowSpec>,
    pub scheduler: SchedulerKind,
    pub config: SimConfig,
    /// Per-link AoI ratio; links not listed use the ratio of the flows' planned loads.
    pub gamma: BTreeMap<LinkId, f64>,
}

impl Scenario {
    pub fn new(
        network: Network,
        flows: Vec<FlowSpec>,
        scheduler: SchedulerKind,
        config: SimConfig,
    ) -> Self {
        Self {
            network,
            flows,
            scheduler,
            config,
            gamma: BTreeMap::new(),
        }
    }

    pub fn with_gamma(mut self, link: &str, gamma: f64) -> Self {
        self.gamma.insert(link.into(), gamma);
        self
    }

    /// Planned `(S_LDA, S_AoI)` per link from the flows' rates and frequencies.
    pub fn planned_loads(&self) -> BTreeMap<LinkId, (f64, f64)> {
        let mut loads: BTreeMap<LinkId, (f64, f64)> = self
            .network
            .links()
            .iter()
            .map(|l| (l.id.clone(), (0.0, 0.0)))
            .collect();
        for f in &self.flows {
            for id in &f.path {
                if let Some(e) = loads.get_mut(id) {
                    match f.class {
                        FlowClass::Lda => e.0 += f.offered_bps(),
                        FlowClass::Aoi => e.1 += f.offered_bps(),
                    }
                }
            }
        }
        loads
    }

    /// AoI ratio used by the schedulers on `link`.
    pub fn gamma_for(&self, link: &LinkId) -> f64 {
        if let Some(&g) = self.gamma.get(link) {
            return g;
        }
        let (lda, aoi) = self.planned_loads().get(link).copied().unwrap_or_default();
        aoi_ratio(lda, aoi).unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let c = &self.config;
        if !(c.duration_s > 0.0 && c.duration_s.is_finite()) {
            return Err(SimError::Invalid(format!("duration must be positive, got {}", c.duration_s)));
        }
        let w = c.warmup();
        if !(w >= 0.0 && w < c.duration_s) {
            return Err(SimError::Invalid(format!(
                "warmup {w} must lie in [0, duration {})",
                c.duration_s
            )));
        }
        if let Some(v) = validate_network(&self.network, &self.flows).first() {
            return Err(SimError::Invalid(v.to_string()));
        }
        for (id, &g) in &self.gamma {
            if !(0.0..=1.0).contains(&g) {
                return Err(SimError::Invalid(format!("gamma {g} on link {id} outside [0, 1]")));
            }
        }
        for f in &self.flows {
            match f.class {
                FlowClass::Aoi if f.freq_hz.is_none() => {
                    return Err(SimError::Invalid(format!("AoI flow {} has no freq_hz", f.id)));
                }
                FlowClass::Lda if c.lda_mode == LdaMode::Paced && f.rate_bps.is_none() => {
                    return Err(SimError::Invalid(format!(
                        "LDA flow {} has no rate_bps (paced sources need one)",
                        f.id
                    )));
                }
                _ => {}
            }
        }
        match self.scheduler {
            SchedulerKind::Tdm { frame_s: Some(t) } | SchedulerKind::WaitingOracle { period_s: Some(t) }
                if !(t > 0.0) =>
            {
                Err(SimError::Invalid(format!("non-positive scheduler period {t}")))
            }
            _ => Ok(()),
        }
    }
}
