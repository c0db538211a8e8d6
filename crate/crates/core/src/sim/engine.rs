use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::aaq::{
    Aaq, AaqScheduler, FifoOutcome, FifoQueue, IfilOutcome, IfilQueue, Packet, SdmState,
    TdmState,
};
use crate::model::{propagation_delay, FlowClass, FlowId, NodeId};
use crate::time::SimTime;

use super::measure::{decompose_age, measure_aoi, measure_throughput, Delivery, Window};
use super::report::{FlowReport, LinkStats, SimReport};
use super::source::{periodic_tick, waiting_oracle_period, LdaMode};
use super::{Scenario, SchedulerKind, SimError};

/// A report plus the raw delivery log, indexed like `Scenario::flows`.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub report: SimReport,
    pub deliveries: Vec<Vec<Delivery>>,
    pub trace: Option<Vec<TraceRecord>>,
}

/// One processed event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub time: SimTime,
    pub node: NodeId,
    pub event: &'static str,
    pub flow: Option<FlowId>,
    pub seq: Option<u64>,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.time.0, self.node, self.event)?;
        match (&self.flow, self.seq) {
            (Some(flow), Some(seq)) => write!(f, " {flow} {seq}"),
            _ => Ok(()),
        }
    }
}

pub fn run(scenario: &Scenario) -> Result<SimReport, SimError> {
    run_detailed(scenario).map(|r| r.report)
}

pub fn run_detailed(scenario: &Scenario) -> Result<SimRun, SimError> {
    scenario.validate()?;
    let mut engine = Engine::new(scenario)?;
    engine.run()?;
    Ok(engine.finish())
}

#[derive(Debug, Clone, Copy)]
enum Body {
    Gen { flow: usize, k: u64 },
    Arrive { hop: usize, pkt: Packet },
    Deliver { pkt: Packet },
    TryStart { port: usize, lane: usize },
    TxDone { port: usize, lane: usize },
}

#[derive(Debug)]
struct Event {
    time: SimTime,
    node: usize,
    kind: u8,
    key: usize,
    seq: u64,
    body: Body,
}

impl Event {
    fn order(&self) -> (SimTime, usize, u8, usize, u64) {
        (self.time, self.node, self.kind, self.key, self.seq)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.order() == other.order()
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.order().cmp(&self.order())
    }
}

struct FlowState {
    class: FlowClass,
    ports: Vec<usize>,
    size_bits: f64,
    /// Generations per second for periodic sources.
    freq: Option<f64>,
    phase_s: f64,
    greedy: bool,
    src_node: usize,
    dst_node: usize,
    generated: u64,
    dropped: u64,
    replaced: u64,
    deliveries: Vec<Delivery>,
    next_seq: u64,
}

enum PortQueue {
    Aaq(Aaq),
    Fifo(FifoQueue),
    Priority {
        lda: FifoQueue,
        aoi: IfilQueue,
    },
    Oracle {
        lda: FifoQueue,
        aoi: IfilQueue,
        period: u64,
        wake: Option<SimTime>,
    },
    /// Each AoI flow owns lane `lane_of[flow]` and waits in its slot there, newest
    /// packet only; LDA uses lane 0.
    Share {
        lda: FifoQueue,
        slots: Vec<Option<(Packet, SimTime)>>,
        lane_of: HashMap<usize, usize>,
    },
}

enum Admit {
    Queued,
    Dropped,
    Replaced,
}

impl PortQueue {
    fn enqueue(&mut self, class: FlowClass, pkt: Packet, now: SimTime) -> Admit {
        let fifo = |q: &mut FifoQueue| match q.enqueue(pkt) {
            FifoOutcome::Inserted => Admit::Queued,
            FifoOutcome::Dropped => Admit::Dropped,
        };
        let ifil = |q: &mut IfilQueue| match q.enqueue(pkt) {
            IfilOutcome::Inserted => Admit::Queued,
            IfilOutcome::Replaced(_) => Admit::Replaced,
            IfilOutcome::Rejected => Admit::Dropped,
        };
        match (self, class) {
            (PortQueue::Fifo(q), _) => fifo(q),
            (PortQueue::Aaq(q), FlowClass::Lda) => fifo(&mut q.lda),
            (PortQueue::Aaq(q), FlowClass::Aoi) => ifil(&mut q.aoi),
            (PortQueue::Priority { lda, .. } | PortQueue::Oracle { lda, .. }, FlowClass::Lda) => {
                fifo(lda)
            }
            (PortQueue::Priority { aoi, .. } | PortQueue::Oracle { aoi, .. }, FlowClass::Aoi) => {
                ifil(aoi)
            }
            (PortQueue::Share { lda, .. }, FlowClass::Lda) => fifo(lda),
            (PortQueue::Share { slots, lane_of, .. }, FlowClass::Aoi) => {
                match slots[lane_of[&pkt.flow] - 1].replace((pkt, now)) {
                    Some(_) => Admit::Replaced,
                    None => Admit::Queued,
                }
            }
        }
    }

    fn lane(&self, class: FlowClass, flow: usize) -> usize {
        match (self, class) {
            (PortQueue::Share { lane_of, .. }, FlowClass::Aoi) => lane_of[&flow],
            _ => 0,
        }
    }
}

/// A transmitter. Ports have one at full capacity, except under the per-flow share
/// scheduler, which splits the capacity into parallel lanes.
struct Lane {
    rate_bps: f64,
    /// Packet in transmission: (class, packet, arrival at this port).
    current: Option<(FlowClass, Packet, SimTime)>,
    try_pending: bool,
}

impl Lane {
    fn new(rate_bps: f64) -> Self {
        Self {
            rate_bps,
            current: None,
            try_pending: false,
        }
    }
}

struct Port {
    node: usize,
    capacity_bps: f64,
    latency: SimTime,
    queue: PortQueue,
    lanes: Vec<Lane>,
    gamma: f64,
    lda_bits: f64,
    aoi_bits: f64,
    /// Busy ticks weighted by the lane's fraction of the capacity.
    lda_busy: f64,
    aoi_busy: f64,
    deadline_misses: u64,
}

struct Engine<'a> {
    sc: &'a Scenario,
    nodes: Vec<NodeId>,
    flows: Vec<FlowState>,
    ports: Vec<Port>,
    heap: BinaryHeap<Event>,
    seq: u64,
    end: SimTime,
    warmup: SimTime,
    events: u64,
    trace: Option<Vec<TraceRecord>>,
}

impl<'a> Engine<'a> {
    fn new(sc: &'a Scenario) -> Result<Self, SimError> {
        let cfg = &sc.config;
        let net = &sc.network;
        let nodes: Vec<NodeId> = net.nodes().iter().cloned().collect();
        let node_idx: HashMap<&NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

        let mut flows = Vec::with_capacity(sc.flows.len());
        for f in &sc.flows {
            let ports: Vec<usize> = f
                .path
                .iter()
                .map(|l| net.link_index(l).expect("validated path"))
                .collect();
            let links = net.links();
            let greedy = f.class == FlowClass::Lda && cfg.lda_mode == LdaMode::Greedy;
            let freq = match f.class {
                FlowClass::Aoi => f.freq_hz,
                FlowClass::Lda if greedy => None,
                FlowClass::Lda => f.rate_bps.map(|r| r / f.size_bits),
            }
            .filter(|v| *v > 0.0);
            let mut phase_s = f.phase_s;
            if cfg.randomize_phases {
                if let Some(freq) = freq {
                    phase_s = rng.random::<f64>() / freq;
                }
            }
            flows.push(FlowState {
                class: f.class,
                size_bits: f.size_bits,
                freq,
                phase_s,
                greedy,
                src_node: node_idx[&links[ports[0]].src],
                dst_node: node_idx[&links[*ports.last().expect("non-empty path")].dst],
                ports,
                generated: 0,
                dropped: 0,
                replaced: 0,
                deliveries: Vec::new(),
                next_seq: 0,
            });
        }

        let loads = sc.planned_loads();
        let mut ports = Vec::with_capacity(net.links().len());
        for (li, link) in net.links().iter().enumerate() {
            let crossing: Vec<usize> = (0..flows.len())
                .filter(|&i| flows[i].ports.contains(&li))
                .collect();
            let max_bits = crossing
                .iter()
                .map(|&i| flows[i].size_bits)
                .fold(0.0, f64::max);
            let max_tx = max_bits / link.capacity_bps;
            let fifo_bytes = cfg.fifo_max_bytes.unwrap_or(if max_bits > 0.0 {
                100.0 * max_bits / 8.0
            } else {
                f64::INFINITY
            });
            let ifil = || IfilQueue::new(cfg.ifil_capacity.unwrap_or(usize::MAX), cfg.replace_policy);
            let gamma = sc.gamma_for(&link.id);
            let mut lanes = vec![Lane::new(link.capacity_bps)];
            let queue = match sc.scheduler {
                SchedulerKind::Sdm => PortQueue::Aaq(Aaq::new(
                    FifoQueue::new(fifo_bytes),
                    ifil(),
                    AaqScheduler::Sdm(SdmState::new(gamma)),
                )),
                SchedulerKind::Tdm { frame_s } => {
                    let frame = frame_s.unwrap_or(20.0 * max_tx);
                    PortQueue::Aaq(Aaq::new(
                        FifoQueue::new(fifo_bytes),
                        ifil(),
                        AaqScheduler::Tdm(TdmState::new(frame, gamma)),
                    ))
                }
                SchedulerKind::Fifo => PortQueue::Fifo(FifoQueue::new(fifo_bytes)),
                SchedulerKind::PriorityAoi => PortQueue::Priority {
                    lda: FifoQueue::new(fifo_bytes),
                    aoi: ifil(),
                },
                SchedulerKind::WaitingOracle { period_s } => {
                    let aoi: Vec<&FlowState> = crossing
                        .iter()
                        .map(|&i| &flows[i])
                        .filter(|f| f.class == FlowClass::Aoi)
                        .collect();
                    let t_i = aoi
                        .iter()
                        .filter_map(|f| f.freq.map(|mu| 1.0 / mu))
                        .fold(f64::INFINITY, f64::min);
                    let d_t = aoi.iter().map(|f| f.size_bits).fold(0.0, f64::max) / link.capacity_bps;
                    let period = period_s.unwrap_or(if t_i.is_finite() && d_t > 0.0 {
                        waiting_oracle_period(t_i, d_t)
                    } else {
                        max_tx
                    });
                    PortQueue::Oracle {
                        lda: FifoQueue::new(fifo_bytes),
                        aoi: ifil(),
                        period: SimTime::from_secs(period).0.max(1),
                        wake: None,
                    }
                }
                SchedulerKind::PerFlowShare => {
                    let (s_lda, s_aoi) = loads.get(&link.id).copied().unwrap_or_default();
                    let mut lane_of = HashMap::new();
                    let mut reserved = 0.0;
                    for &i in &crossing {
                        let f = &sc.flows[i];
                        if f.class != FlowClass::Aoi {
                            continue;
                        }
                        let mu = f.freq_hz.unwrap_or(0.0);
                        if !(mu > 0.0) {
                            return Err(SimError::ZeroFrequency(f.id.to_string()));
                        }
                        // the flow's fraction of the planned load, scaled to the whole link
                        let rho = link.capacity_bps * mu * f.size_bits / (s_lda + s_aoi);
                        reserved += rho;
                        lane_of.insert(i, lanes.len());
                        lanes.push(Lane::new(rho));
                    }
                    lanes[0].rate_bps = (link.capacity_bps - reserved).max(0.0);
                    PortQueue::Share {
                        lda: FifoQueue::new(fifo_bytes),
                        slots: vec![None; lanes.len() - 1],
                        lane_of,
                    }
                }
            };
            ports.push(Port {
                node: node_idx[&link.src],
                capacity_bps: link.capacity_bps,
                latency: SimTime::from_secs(link.latency_s),
                queue,
                lanes,
                gamma,
                lda_bits: 0.0,
                aoi_bits: 0.0,
                lda_busy: 0.0,
                aoi_busy: 0.0,
                deadline_misses: 0,
            });
        }

        let mut engine = Engine {
            sc,
            nodes,
            flows,
            ports,
            heap: BinaryHeap::new(),
            seq: 0,
            end: SimTime::from_secs(cfg.duration_s),
            warmup: SimTime::from_secs(cfg.warmup()),
            events: 0,
            trace: cfg.trace.then(Vec::new),
        };
        for i in 0..engine.flows.len() {
            let f = &engine.flows[i];
            if f.greedy {
                for _ in 0..2 {
                    let pkt = engine.new_packet(i, SimTime::ZERO);
                    engine.push(SimTime::ZERO, Body::Arrive { hop: 0, pkt });
                }
            } else if let Some(freq) = f.freq {
                let t = periodic_tick(f.phase_s, freq, 0);
                if t < engine.end {
                    engine.push(t, Body::Gen { flow: i, k: 0 });
                }
            }
        }
        Ok(engine)
    }

    fn new_packet(&mut self, flow: usize, now: SimTime) -> Packet {
        let f = &mut self.flows[flow];
        f.generated += 1;
        let seq = f.next_seq;
        f.next_seq += 1;
        Packet {
            flow,
            size_bits: f.size_bits,
            gen_time: now,
            seq,
        }
    }

    fn push(&mut self, time: SimTime, body: Body) {
        let (node, kind, key) = match body {
            Body::Gen { flow, .. } => (self.flows[flow].src_node, 0, flow),
            Body::Arrive { hop, pkt } => {
                (self.ports[self.flows[pkt.flow].ports[hop]].node, 0, pkt.flow)
            }
            Body::Deliver { pkt } => (self.flows[pkt.flow].dst_node, 0, pkt.flow),
            Body::TryStart { port, .. } | Body::TxDone { port, .. } => {
                (self.ports[port].node, 1, port)
            }
        };
        self.seq += 1;
        self.heap.push(Event {
            time,
            node,
            kind,
            key,
            seq: self.seq,
            body,
        });
    }

    fn run(&mut self) -> Result<(), SimError> {
        let limit = self.sc.config.max_events;
        while let Some(ev) = self.heap.peek() {
            if ev.time >= self.end {
                break;
            }
            let ev = self.heap.pop().expect("peeked");
            self.events += 1;
            if self.events > limit {
                return Err(SimError::EventOverflow(limit));
            }
            if self.trace.is_some() {
                self.record(&ev);
            }
            let now = ev.time;
            match ev.body {
                Body::Gen { flow, k } => {
                    let pkt = self.new_packet(flow, now);
                    self.arrive(0, pkt, now);
                    let f = &self.flows[flow];
                    let next = periodic_tick(f.phase_s, f.freq.expect("periodic source"), k + 1);
                    if next < self.end {
                        self.push(next, Body::Gen { flow, k: k + 1 });
                    }
                }
                Body::Arrive { hop, pkt } => self.arrive(hop, pkt, now),
                Body::Deliver { pkt } => {
                    self.flows[pkt.flow].deliveries.push(Delivery {
                        time: now,
                        gen_time: pkt.gen_time,
                        bits: pkt.size_bits,
                    });
                }
                Body::TryStart { port, lane } => {
                    let p = &mut self.ports[port];
                    p.lanes[lane].try_pending = false;
                    if let PortQueue::Oracle { wake, .. } = &mut p.queue {
                        if *wake == Some(now) {
                            *wake = None;
                        }
                    }
                    self.try_start(port, lane, now);
                }
                Body::TxDone { port, lane } => self.tx_done(port, lane, now),
            }
        }
        Ok(())
    }

    fn record(&mut self, ev: &Event) {
        let (event, pkt) = match ev.body {
            Body::Gen { .. } => ("gen", None),
            Body::Arrive { pkt, .. } => ("arrive", Some(pkt)),
            Body::Deliver { pkt } => ("deliver", Some(pkt)),
            Body::TryStart { .. } => ("try_start", None),
            Body::TxDone { port, lane } => {
                ("tx_done", self.ports[port].lanes[lane].current.map(|c| c.1))
            }
        };
        let (flow, seq) = match (ev.body, pkt) {
            (Body::Gen { flow, k }, _) => (Some(self.sc.flows[flow].id.clone()), Some(k)),
            (_, Some(p)) => (Some(self.sc.flows[p.flow].id.clone()), Some(p.seq)),
            _ => (None, None),
        };
        let rec = TraceRecord {
            time: ev.time,
            node: self.nodes[ev.node].clone(),
            event,
            flow,
            seq,
        };
        if let Some(t) = &mut self.trace {
            t.push(rec);
        }
    }

    fn arrive(&mut self, hop: usize, pkt: Packet, now: SimTime) {
        let f = &self.flows[pkt.flow];
        let class = f.class;
        let port = f.ports[hop];
        match self.ports[port].queue.enqueue(class, pkt, now) {
            Admit::Queued => {}
            Admit::Dropped => self.flows[pkt.flow].dropped += 1,
            Admit::Replaced => self.flows[pkt.flow].replaced += 1,
        }
        let p = &mut self.ports[port];
        let lane = p.queue.lane(class, pkt.flow);
        let l = &mut p.lanes[lane];
        if l.current.is_none() && !l.try_pending {
            l.try_pending = true;
            self.push(now, Body::TryStart { port, lane });
        }
    }

    fn try_start(&mut self, port: usize, lane: usize, now: SimTime) {
        let now_s = now.as_secs();
        let p = &mut self.ports[port];
        if p.lanes[lane].current.is_some() {
            return;
        }
        let popped = match &mut p.queue {
            PortQueue::Aaq(q) => q.pop(now_s).map(|(c, pkt)| (c, pkt, now)),
            PortQueue::Fifo(q) => q.dequeue().map(|pkt| (self.flows[pkt.flow].class, pkt, now)),
            PortQueue::Priority { lda, aoi } => aoi
                .dequeue()
                .map(|pkt| (FlowClass::Aoi, pkt, now))
                .or_else(|| lda.dequeue().map(|pkt| (FlowClass::Lda, pkt, now))),
            PortQueue::Oracle {
                lda,
                aoi,
                period,
                wake,
            } => {
                if lda.is_empty() && aoi.is_empty() {
                    None
                } else if now.0 % *period != 0 {
                    let slot = SimTime(now.0.div_ceil(*period) * *period);
                    if *wake != Some(slot) {
                        *wake = Some(slot);
                        self.seq += 1;
                        self.heap.push(Event {
                            time: slot,
                            node: p.node,
                            kind: 1,
                            key: port,
                            seq: self.seq,
                            body: Body::TryStart { port, lane },
                        });
                    }
                    None
                } else {
                    aoi.dequeue()
                        .map(|pkt| (FlowClass::Aoi, pkt, now))
                        .or_else(|| lda.dequeue().map(|pkt| (FlowClass::Lda, pkt, now)))
                }
            }
            PortQueue::Share { lda, slots, .. } => match lane {
                0 => lda.dequeue().map(|pkt| (FlowClass::Lda, pkt, now)),
                _ => slots[lane - 1].take().map(|(pkt, arrived)| (FlowClass::Aoi, pkt, arrived)),
            },
        };
        let Some((class, pkt, arrived)) = popped else {
            return;
        };
        let rate = p.lanes[lane].rate_bps;
        let tx_s = pkt.size_bits / rate;
        // a lane with no capacity holds its packet past the end of the run
        let done = if now_s + tx_s < self.end.as_secs() {
            now + SimTime::from_secs(tx_s)
        } else {
            SimTime(u64::MAX)
        };
        if let PortQueue::Aaq(q) = &mut p.queue {
            let done_s = if done < self.end { done.as_secs() } else { now_s + tx_s };
            q.account(class, pkt.size_bits, now_s, done_s);
        }
        // busy time is clipped to the window; bits count by start time
        let busy = done.min(self.end).0.saturating_sub(now.max(self.warmup).0) as f64 * rate
            / p.capacity_bps;
        let counted = now >= self.warmup;
        match class {
            FlowClass::Lda => {
                p.lda_busy += busy;
                if counted {
                    p.lda_bits += pkt.size_bits;
                }
            }
            FlowClass::Aoi => {
                p.aoi_busy += busy;
                if counted {
                    p.aoi_bits += pkt.size_bits;
                }
            }
        }
        p.lanes[lane].current = Some((class, pkt, arrived));
        if done < self.end {
            self.push(done, Body::TxDone { port, lane });
        }

        let f = &self.flows[pkt.flow];
        if f.greedy && f.ports[0] == port && now < self.end {
            let next = self.new_packet(pkt.flow, now);
            self.arrive(0, next, now);
        }
    }

    fn tx_done(&mut self, port: usize, lane: usize, now: SimTime) {
        let p = &mut self.ports[port];
        let (class, pkt, arrived) = p.lanes[lane].current.take().expect("transmission in progress");
        let latency = p.latency;
        if class == FlowClass::Aoi && matches!(p.queue, PortQueue::Share { .. }) {
            let mu = self.flows[pkt.flow].freq.unwrap_or(0.0);
            // two ticks of slack for rounding the period and the transmission time
            if (now - arrived).0 > SimTime::from_secs(1.0 / mu).0 + 2 {
                p.deadline_misses += 1;
            }
        }
        let f = &self.flows[pkt.flow];
        let hop = f.ports.iter().position(|&q| q == port).expect("port on path");
        if hop + 1 < f.ports.len() {
            self.push(now + latency, Body::Arrive { hop: hop + 1, pkt });
        } else {
            self.push(now + latency, Body::Deliver { pkt });
        }
        self.try_start(port, lane, now);
    }

    fn in_flight(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.flows.len()];
        for p in &self.ports {
            for (_, pkt, _) in p.lanes.iter().filter_map(|l| l.current) {
                counts[pkt.flow] += 1;
            }
            let mut add = |pkt: &Packet| counts[pkt.flow] += 1;
            match &p.queue {
                PortQueue::Aaq(q) => {
                    q.lda.iter().for_each(&mut add);
                    q.aoi.iter().for_each(&mut add);
                }
                PortQueue::Fifo(q) => q.iter().for_each(&mut add),
                PortQueue::Priority { lda, aoi } | PortQueue::Oracle { lda, aoi, .. } => {
                    lda.iter().for_each(&mut add);
                    aoi.iter().for_each(&mut add);
                }
                PortQueue::Share { lda, slots, .. } => {
                    lda.iter().for_each(&mut add);
                    slots.iter().flatten().for_each(|(pkt, _)| add(pkt));
                }
            }
        }
        for ev in self.heap.iter() {
            if let Body::Arrive { pkt, .. } | Body::Deliver { pkt } = ev.body {
                counts[pkt.flow] += 1;
            }
        }
        counts
    }

    fn finish(self) -> SimRun {
        let in_flight = self.in_flight();
        let net = &self.sc.network;
        let throughput_window = Window::new(self.warmup, self.end);
        let mut reports = Vec::with_capacity(self.flows.len());
        let mut deliveries = Vec::with_capacity(self.flows.len());
        for (i, (f, spec)) in self.flows.into_iter().zip(&self.sc.flows).enumerate() {
            let throughput_bps =
                measure_throughput(&f.deliveries, throughput_window).unwrap_or(0.0);
            let (aoi_s, parts) = match f.class {
                FlowClass::Aoi => {
                    let aoi = measure_aoi(&f.deliveries, throughput_window, None).ok();
                    let p = propagation_delay(spec, net).unwrap_or(0.0);
                    let parts = match (aoi, f.freq) {
                        (Some(a), Some(mu)) => Some(decompose_age(a, mu, p)),
                        _ => None,
                    };
                    (aoi, parts)
                }
                FlowClass::Lda => (None, None),
            };
            reports.push(FlowReport {
                flow: spec.id.clone(),
                class: f.class,
                aoi_s,
                u_avg_s: parts.map(|p| p.u_avg_s),
                p_avg_s: parts.map(|p| p.p_avg_s),
                q_avg_s: parts.map(|p| p.q_avg_s),
                throughput_bps,
                generated: f.generated,
                delivered: f.deliveries.len() as u64,
                dropped: f.dropped,
                replaced: f.replaced,
                in_flight: in_flight[i],
            });
            deliveries.push(f.deliveries);
        }
        let window_ticks = (self.end - self.warmup).0 as f64;
        let links = self
            .ports
            .iter()
            .zip(net.links())
            .map(|(p, l)| {
                let bits = p.lda_bits + p.aoi_bits;
                let busy = p.lda_busy + p.aoi_busy;
                LinkStats {
                    link: l.id.clone(),
                    gamma: p.gamma,
                    aoi_bit_share: if bits > 0.0 { p.aoi_bits / bits } else { 0.0 },
                    aoi_busy_share: if busy > 0.0 { p.aoi_busy / busy } else { 0.0 },
                    utilization: busy / window_ticks,
                    lda_bits: p.lda_bits,
                    aoi_bits: p.aoi_bits,
                    hop_deadline_misses: p.deadline_misses,
                }
            })
            .collect();
        let cfg = &self.sc.config;
        SimRun {
            report: SimReport {
                scheduler: self.sc.scheduler.to_string(),
                seed: cfg.seed,
                duration_s: cfg.duration_s,
                warmup_s: cfg.warmup(),
                events: self.events,
                flows: reports,
                links,
            },
            deliveries,
            trace: self.trace,
        }
    }
}
