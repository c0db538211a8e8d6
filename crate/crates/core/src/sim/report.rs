//! Per-run results.

use std::io;

use serde::{Deserialize, Serialize};

use crate::model::{FlowClass, FlowId, LinkId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub flow: FlowId,
    pub class: FlowClass,
    /// Time-average age; `None` for LDA flows and for AoI flows never delivered.
    pub aoi_s: Option<f64>,
    pub u_avg_s: Option<f64>,
    pub p_avg_s: Option<f64>,
    pub q_avg_s: Option<f64>,
    pub throughput_bps: f64,
    pub generated: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub replaced: u64,
    pub in_flight: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub link: LinkId,
    /// AoI ratio the port's scheduler was given.
    pub gamma: f64,
    /// AoI share of the bits sent in the measurement window.
    pub aoi_bit_share: f64,
    /// AoI share of the busy time in the measurement window.
    pub aoi_busy_share: f64,
    /// Busy fraction of the measurement window.
    pub utilization: f64,
    pub lda_bits: f64,
    pub aoi_bits: f64,
    /// AoI packets that spent longer than `1/mu_f` at this hop (per-flow share only).
    pub hop_deadline_misses: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub scheduler: String,
    pub seed: u64,
    pub duration_s: f64,
    pub warmup_s: f64,
    pub events: u64,
    pub flows: Vec<FlowReport>,
    pub links: Vec<LinkStats>,
}

impl SimReport {
    pub fn flow(&self, id: &str) -> Option<&FlowReport> {
        self.flows.iter().find(|f| f.flow.as_str() == id)
    }

    pub fn link(&self, id: &str) -> Option<&LinkStats> {
        self.links.iter().find(|l| l.link.as_str() == id)
    }

    /// Sum of LDA flow throughputs.
    pub fn total_lda_throughput_bps(&self) -> f64 {
        self.flows
            .iter()
            .filter(|f| f.class == FlowClass::Lda)
            .map(|f| f.throughput_bps)
            .sum()
    }

    /// Sum of AoI flow ages; `None` if some AoI flow was never delivered.
    pub fn total_aoi_s(&self) -> Option<f64> {
        self.flows
            .iter()
            .filter(|f| f.class == FlowClass::Aoi)
            .map(|f| f.aoi_s)
            .sum()
    }

    /// One row per flow.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "flow",
            "class",
            "aoi_s",
            "u_avg_s",
            "p_avg_s",
            "q_avg_s",
            "throughput_bps",
            "generated",
            "delivered",
            "dropped",
            "replaced",
            "in_flight",
        ])?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for f in &self.flows {
            w.write_record([
                f.flow.to_string(),
                f.class.to_string(),
                opt(f.aoi_s),
                opt(f.u_avg_s),
                opt(f.p_avg_s),
                opt(f.q_avg_s),
                f.throughput_bps.to_string(),
                f.generated.to_string(),
                f.delivered.to_string(),
                f.dropped.to_string(),
                f.replaced.to_string(),
                f.in_flight.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
