//! Network, flow and allocation types shared by the solver, the queues and the simulator.
//!
//! Everything is in SI units: bits, seconds and bits per second. A status update of an AoI
//! flow is one packet of `size_bits`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(
    /// Identifier of a node (router or host).
    NodeId
);
id_type!(
    /// Identifier of a directed link.
    LinkId
);
id_type!(
    /// Identifier of a flow.
    FlowId
);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown link `{0}`")]
    UnknownLink(LinkId),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("no route from `{src}` to `{dst}`")]
    NoRoute { src: NodeId, dst: NodeId },
    #[error("route endpoints must differ (`{0}`)")]
    SameEndpoints(NodeId),
    #[error("flow `{0}` has no path")]
    EmptyPath(FlowId),
}

/// Directed link with capacity `capacity_bps` and propagation latency `latency_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub src: NodeId,
    pub dst: NodeId,
    pub capacity_bps: f64,
    pub latency_s: f64,
}

impl Link {
    pub fn new(id: &str, src: &str, dst: &str, capacity_bps: f64, latency_s: f64) -> Self {
        Self {
            id: id.into(),
            src: src.into(),
            dst: dst.into(),
            capacity_bps,
            latency_s,
        }
    }

    /// Time to serialize `size_bits` onto this link.
    pub fn transmission_delay(&self, size_bits: f64) -> f64 {
        size_bits / self.capacity_bps
    }
}

/// A directed graph of nodes and capacity/latency links.
///
/// Construction never fails; use [`validate_network`] to check the invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: BTreeSet<NodeId>,
    links: Vec<Link>,
    by_id: HashMap<LinkId, usize>,
}

impl Network {
    pub fn new<I, N>(nodes: I, links: Vec<Link>) -> Self
    where
        I: IntoIterator<Item = N>,
        N: Into<NodeId>,
    {
        let nodes = nodes.into_iter().map(Into::into).collect();
        let mut by_id = HashMap::with_capacity(links.len());
        for (i, l) in links.iter().enumerate() {
            by_id.entry(l.id.clone()).or_insert(i);
        }
        Self {
            nodes,
            links,
            by_id,
        }
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: &LinkId) -> Option<&Link> {
        self.by_id.get(id).map(|&i| &self.links[i])
    }

    pub fn link_index(&self, id: &LinkId) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Resolves a path of link ids to links, failing on the first unknown id.
    pub fn resolve_path<'a>(&'a self, path: &[LinkId]) -> Result<Vec<&'a Link>, ModelError> {
        path.iter()
            .map(|id| self.link(id).ok_or_else(|| ModelError::UnknownLink(id.clone())))
            .collect()
    }

    /// Total propagation latency `d_f` of a path.
    pub fn path_latency(&self, path: &[LinkId]) -> Result<f64, ModelError> {
        Ok(self.resolve_path(path)?.iter().map(|l| l.latency_s).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlowClass {
    /// Legacy drop-adverse flow: wants throughput.
    #[serde(rename = "LDA", alias = "lda")]
    Lda,
    /// Status-update flow: wants freshness.
    #[serde(rename = "AoI", alias = "aoi", alias = "AOI")]
    Aoi,
}

impl fmt::Display for FlowClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowClass::Lda => "LDA",
            FlowClass::Aoi => "AoI",
        })
    }
}

/// A flow on a predetermined simple path.
///
/// For LDA flows `size_bits` is the packet size and `rate_bps` the sending rate. For AoI flows
/// `size_bits` is the status update size and `freq_hz` the update frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub id: FlowId,
    pub class: FlowClass,
    pub path: Vec<LinkId>,
    pub size_bits: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_bps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_hz: Option<f64>,
    #[serde(default)]
    pub phase_s: f64,
}

impl FlowSpec {
    pub fn lda(id: &str, path: &[&str], size_bits: f64) -> Self {
        Self::new(id, FlowClass::Lda, path, size_bits)
    }

    pub fn aoi(id: &str, path: &[&str], size_bits: f64) -> Self {
        Self::new(id, FlowClass::Aoi, path, size_bits)
    }

    fn new(id: &str, class: FlowClass, path: &[&str], size_bits: f64) -> Self {
        Self {
            id: id.into(),
            class,
            path: path.iter().map(|&p| p.into()).collect(),
            size_bits,
            rate_bps: None,
            freq_hz: None,
            phase_s: 0.0,
        }
    }

    pub fn with_rate(mut self, rate_bps: f64) -> Self {
        self.rate_bps = Some(rate_bps);
        self
    }

    pub fn with_freq(mut self, freq_hz: f64) -> Self {
        self.freq_hz = Some(freq_hz);
        self
    }

    pub fn with_phase(mut self, phase_s: f64) -> Self {
        self.phase_s = phase_s;
        self
    }

    /// Number of links on the path, `|f|`.
    pub fn hops(&self) -> usize {
        self.path.len()
    }

    /// The allocated value: `rate_bps` for LDA, `freq_hz` for AoI.
    pub fn allocated(&self) -> Option<f64> {
        match self.class {
            FlowClass::Lda => self.rate_bps,
            FlowClass::Aoi => self.freq_hz,
        }
    }

    /// Offered load in bits per second: `r_f` or `mu_f * s_f`.
    pub fn offered_bps(&self) -> f64 {
        match self.class {
            FlowClass::Lda => self.rate_bps.unwrap_or(0.0),
            FlowClass::Aoi => self.freq_hz.unwrap_or(0.0) * self.size_bits,
        }
    }
}

/// Planned LDA and AoI traffic on one link.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkLoad {
    pub s_lda_bps: f64,
    pub s_aoi_bps: f64,
}

impl LinkLoad {
    pub fn total(&self) -> f64 {
        self.s_lda_bps + self.s_aoi_bps
    }
}

/// Solver output: per-flow rate or frequency, per-link loads and AoI ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateAllocation {
    pub values: BTreeMap<FlowId, f64>,
    pub loads: BTreeMap<LinkId, LinkLoad>,
    pub gamma: BTreeMap<LinkId, f64>,
    pub objective_value: f64,
    pub lambda: f64,
}

impl RateAllocation {
    pub fn value(&self, flow: &FlowId) -> Option<f64> {
        self.values.get(flow).copied()
    }

    /// Copies the allocated values into `flows` (`rate_bps` for LDA, `freq_hz` for AoI).
    pub fn apply_to(&self, flows: &mut [FlowSpec]) {
        for f in flows {
            if let Some(&v) = self.values.get(&f.id) {
                match f.class {
                    FlowClass::Lda => f.rate_bps = Some(v),
                    FlowClass::Aoi => f.freq_hz = Some(v),
                }
            }
        }
    }

    /// Largest `(load - capacity) / capacity` over all links; `<= 0` when feasible.
    pub fn max_relative_overload(&self, net: &Network) -> f64 {
        self.loads
            .iter()
            .filter_map(|(id, load)| {
                net.link(id)
                    .map(|l| (load.total() - l.capacity_bps) / l.capacity_bps)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A broken network or flow invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateLink(LinkId),
    UnknownEndpoint { link: LinkId, node: NodeId },
    NonPositiveCapacity(LinkId),
    NegativeLatency(LinkId),
    DuplicateFlow(FlowId),
    EmptyPath(FlowId),
    UnknownPathLink { flow: FlowId, link: LinkId },
    DisconnectedPath(FlowId),
    RepeatedNode(FlowId),
    NonPositiveSize(FlowId),
    NegativeRate(FlowId),
    NegativeFrequency(FlowId),
}

impl Violation {
    /// The id the violation is about, for locating it in a source document.
    pub fn subject(&self) -> &str {
        use Violation::*;
        match self {
            DuplicateLink(l) | NonPositiveCapacity(l) | NegativeLatency(l) => l.as_str(),
            UnknownEndpoint { link, .. } => link.as_str(),
            DuplicateFlow(f) | EmptyPath(f) | DisconnectedPath(f) | RepeatedNode(f)
            | NonPositiveSize(f) | NegativeRate(f) | NegativeFrequency(f) => f.as_str(),
            UnknownPathLink { flow, .. } => flow.as_str(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateLink(l) => write!(f, "duplicate link id: {l}"),
            UnknownEndpoint { link, node } => write!(f, "unknown endpoint {node} on link {link}"),
            NonPositiveCapacity(l) => write!(f, "non-positive capacity: {l}"),
            NegativeLatency(l) => write!(f, "negative latency: {l}"),
            DuplicateFlow(id) => write!(f, "duplicate flow id: {id}"),
            EmptyPath(id) => write!(f, "empty path: flow {id}"),
            UnknownPathLink { flow, link } => write!(f, "unknown link {link} in path of flow {flow}"),
            DisconnectedPath(id) => write!(f, "disconnected path: flow {id}"),
            RepeatedNode(id) => write!(f, "path revisits a node: flow {id}"),
            NonPositiveSize(id) => write!(f, "non-positive size: flow {id}"),
            NegativeRate(id) => write!(f, "negative rate: flow {id}"),
            NegativeFrequency(id) => write!(f, "negative frequency: flow {id}"),
        }
    }
}

/// Checks every network and flow invariant; returns an empty list iff all hold.
pub fn validate_network(net: &Network, flows: &[FlowSpec]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for l in net.links() {
        if !seen.insert(&l.id) {
            out.push(Violation::DuplicateLink(l.id.clone()));
        }
        for node in [&l.src, &l.dst] {
            if !net.nodes().contains(node) {
                out.push(Violation::UnknownEndpoint {
                    link: l.id.clone(),
                    node: node.clone(),
                });
            }
        }
        // `!(x > 0)` also rejects NaN
        if !(l.capacity_bps > 0.0) {
            out.push(Violation::NonPositiveCapacity(l.id.clone()));
        }
        if !(l.latency_s >= 0.0) {
            out.push(Violation::NegativeLatency(l.id.clone()));
        }
    }

    let mut flow_ids = BTreeSet::new();
    for f in flows {
        if !flow_ids.insert(&f.id) {
            out.push(Violation::DuplicateFlow(f.id.clone()));
        }
        if !(f.size_bits > 0.0) {
            out.push(Violation::NonPositiveSize(f.id.clone()));
        }
        if f.rate_bps.is_some_and(|r| !(r >= 0.0)) {
            out.push(Violation::NegativeRate(f.id.clone()));
        }
        if f.freq_hz.is_some_and(|m| !(m >= 0.0)) {
            out.push(Violation::NegativeFrequency(f.id.clone()));
        }
        if f.path.is_empty() {
            out.push(Violation::EmptyPath(f.id.clone()));
            continue;
        }
        let mut links = Vec::with_capacity(f.path.len());
        for id in &f.path {
            match net.link(id) {
                Some(l) => links.push(l),
                None => out.push(Violation::UnknownPathLink {
                    flow: f.id.clone(),
                    link: id.clone(),
                }),
            }
        }
        if links.len() != f.path.len() {
            continue;
        }
        if links.windows(2).any(|w| w[0].dst != w[1].src) {
            out.push(Violation::DisconnectedPath(f.id.clone()));
            continue;
        }
        let mut visited = BTreeSet::new();
        visited.insert(&links[0].src);
        if !links.iter().all(|l| visited.insert(&l.dst)) {
            out.push(Violation::RepeatedNode(f.id.clone()));
        }
    }
    out
}

/// Delay of one update through an empty network: `d_f + sum_l s_f / c_l`.
pub fn propagation_delay(flow: &FlowSpec, net: &Network) -> Result<f64, ModelError> {
    if flow.path.is_empty() {
        return Err(ModelError::EmptyPath(flow.id.clone()));
    }
    Ok(net
        .resolve_path(&flow.path)?
        .iter()
        .map(|l| l.latency_s + l.transmission_delay(flow.size_bits))
        .sum())
}

/// Minimum-hop route for each `(src, dst)` pair.
///
/// Among equal-hop routes the lexicographically smallest sequence of link ids wins, so
/// scenario files that omit paths always resolve the same way.
pub fn shortest_path_routes(
    net: &Network,
    endpoints: &[(NodeId, NodeId)],
) -> Result<Vec<Vec<LinkId>>, ModelError> {
    // outgoing links per node, sorted by id so the greedy walk below picks the smallest
    let mut out_links: BTreeMap<&NodeId, Vec<&Link>> = BTreeMap::new();
    let mut in_links: BTreeMap<&NodeId, Vec<&Link>> = BTreeMap::new();
    for l in net.links() {
        out_links.entry(&l.src).or_default().push(l);
        in_links.entry(&l.dst).or_default().push(l);
    }
    for v in out_links.values_mut() {
        v.sort_by(|a, b| a.id.cmp(&b.id));
    }

    endpoints
        .iter()
        .map(|(src, dst)| {
            for n in [src, dst] {
                if !net.nodes().contains(n) {
                    return Err(ModelError::UnknownNode(n.clone()));
                }
            }
            if src == dst {
                return Err(ModelError::SameEndpoints(src.clone()));
            }
            // hop distance to dst over reversed links
            let mut dist: HashMap<&NodeId, usize> = HashMap::new();
            dist.insert(dst, 0);
            let mut queue = VecDeque::from([dst]);
            while let Some(n) = queue.pop_front() {
                let d = dist[n];
                for l in in_links.get(n).into_iter().flatten() {
                    if !dist.contains_key(&l.src) {
                        dist.insert(&l.src, d + 1);
                        queue.push_back(&l.src);
                    }
                }
            }
            let no_route = || ModelError::NoRoute {
                src: src.clone(),
                dst: dst.clone(),
            };
            let mut remaining = *dist.get(src).ok_or_else(no_route)?;
            let mut at = src;
            let mut path = Vec::with_capacity(remaining);
            while remaining > 0 {
                let next = out_links
                    .get(at)
                    .into_iter()
                    .flatten()
                    .find(|l| dist.get(&l.dst) == Some(&(remaining - 1)))
                    .ok_or_else(no_route)?;
                path.push(next.id.clone());
                at = &next.dst;
                remaining -= 1;
            }
            Ok(path)
        })
        .collect()
}
