//! AoI-aware queueing for one output port.
//!
//! Arriving packets are classified by their flow's declared class. LDA packets go to a
//! tail-drop FIFO. AoI packets go to an IFIL queue: flows are served first-in first-out,
//! but a flow holds at most one packet and a newer arrival replaces the one waiting.
//! A scheduler ([`SdmState`] or [`TdmState`]) picks which sub-queue transmits next.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::FlowClass;
use crate::time::SimTime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AaqError {
    #[error("packet from unknown flow index {0}")]
    UnknownFlow(usize),
}

/// A packet in flight. `flow` indexes the simulation's flow table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    pub flow: usize,
    pub size_bits: f64,
    pub gen_time: SimTime,
    pub seq: u64,
}

/// Maps packets to their flow's class.
#[derive(Debug, Clone, Default)]
pub struct Classifier {
    classes: Vec<FlowClass>,
}

impl Classifier {
    pub fn new(classes: Vec<FlowClass>) -> Self {
        Self { classes }
    }

    pub fn classify(&self, pkt: &Packet) -> Result<FlowClass, AaqError> {
        self.classes
            .get(pkt.flow)
            .copied()
            .ok_or(AaqError::UnknownFlow(pkt.flow))
    }
}

/// What an IFIL enqueue did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IfilOutcome {
    Inserted,
    /// The flow already had a packet waiting; carries the displaced packet.
    Replaced(Packet),
    Rejected,
}

/// Where a replacing packet goes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacePolicy {
    /// Keep the flow's slot position.
    #[default]
    InPlace,
    /// Remove the flow's slot and re-append it at the back.
    MoveToBack,
}

const NIL: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Slot {
    pkt: Packet,
    prev: usize,
    next: usize,
}

/// Inter-flow FIFO, intra-flow newest-wins queue.
///
/// Slots live in a slab threaded as a doubly linked list; a hash map from flow to slot
/// makes replacement constant time.
#[derive(Debug, Clone)]
pub struct IfilQueue {
    slots: Vec<Slot>,
    free: Vec<usize>,
    head: usize,
    tail: usize,
    index: HashMap<usize, usize>,
    capacity: usize,
    policy: ReplacePolicy,
}

impl Default for IfilQueue {
    fn default() -> Self {
        Self::new(usize::MAX, ReplacePolicy::InPlace)
    }
}

impl IfilQueue {
    /// `capacity` bounds the number of distinct flows queued at once.
    pub fn new(capacity: usize, policy: ReplacePolicy) -> Self {
        Self {
            slots: Vec::new(),
            free: Vec::new(),
            head: NIL,
            tail: NIL,
            index: HashMap::new(),
            capacity,
            policy,
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn enqueue(&mut self, pkt: Packet) -> IfilOutcome {
        if let Some(&slot) = self.index.get(&pkt.flow) {
            let old = std::mem::replace(&mut self.slots[slot].pkt, pkt);
            if self.policy == ReplacePolicy::MoveToBack && slot != self.tail {
                self.unlink(slot);
                self.link_back(slot);
            }
            return IfilOutcome::Replaced(old);
        }
        if self.index.len() >= self.capacity {
            return IfilOutcome::Rejected;
        }
        let slot = match self.free.pop() {
            Some(s) => {
                self.slots[s].pkt = pkt;
                s
            }
            None => {
                self.slots.push(Slot {
                    pkt,
                    prev: NIL,
                    next: NIL,
                });
                self.slots.len() - 1
            }
        };
        self.link_back(slot);
        self.index.insert(pkt.flow, slot);
        IfilOutcome::Inserted
    }

    pub fn dequeue(&mut self) -> Option<Packet> {
        if self.head == NIL {
            return None;
        }
        let slot = self.head;
        self.unlink(slot);
        self.free.push(slot);
        let pkt = self.slots[slot].pkt;
        self.index.remove(&pkt.flow);
        Some(pkt)
    }

    pub fn front(&self) -> Option<&Packet> {
        (self.head != NIL).then(|| &self.slots[self.head].pkt)
    }

    /// Queued packets from front to back.
    pub fn iter(&self) -> impl Iterator<Item = &Packet> + '_ {
        let mut at = self.head;
        std::iter::from_fn(move || {
            (at != NIL).then(|| {
                let s = &self.slots[at];
                at = s.next;
                &s.pkt
            })
        })
    }

    /// Removes and returns the queued packet of `flow`, if any.
    pub fn remove_flow(&mut self, flow: usize) -> Option<Packet> {
        let slot = self.index.remove(&flow)?;
        self.unlink(slot);
        self.free.push(slot);
        Some(self.slots[slot].pkt)
    }

    fn link_back(&mut self, slot: usize) {
        self.slots[slot].prev = self.tail;
        self.slots[slot].next = NIL;
        if self.tail == NIL {
            self.head = slot;
        } else {
            self.slots[self.tail].next = slot;
        }
        self.tail = slot;
    }

    fn unlink(&mut self, slot: usize) {
        let Slot { prev, next, .. } = self.slots[slot];
        if prev == NIL {
            self.head = next;
        } else {
            self.slots[prev].next = next;
        }
        if next == NIL {
            self.tail = prev;
        } else {
            self.slots[next].prev = prev;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FifoOutcome {
    Inserted,
    Dropped,
}

/// Tail-drop FIFO bounded by total size.
#[derive(Debug, Clone)]
pub struct FifoQueue {
    packets: VecDeque<Packet>,
    max_bytes: f64,
    bits: f64,
}

impl Default for FifoQueue {
    fn default() -> Self {
        Self::new(f64::INFINITY)
    }
}

impl FifoQueue {
    pub fn new(max_bytes: f64) -> Self {
        Self {
            packets: VecDeque::new(),
            max_bytes,
            bits: 0.0,
        }
    }

    pub fn max_bytes(&self) -> f64 {
        self.max_bytes
    }

    pub fn bytes(&self) -> f64 {
        self.bits / 8.0
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn enqueue(&mut self, pkt: Packet) -> FifoOutcome {
        if (self.bits + pkt.size_bits) / 8.0 > self.max_bytes {
            return FifoOutcome::Dropped;
        }
        self.bits += pkt.size_bits;
        self.packets.push_back(pkt);
        FifoOutcome::Inserted
    }

    pub fn dequeue(&mut self) -> Option<Packet> {
        let pkt = self.packets.pop_front()?;
        self.bits -= pkt.size_bits;
        if self.packets.is_empty() {
            self.bits = 0.0;
        }
        Some(pkt)
    }

    pub fn front(&self) -> Option<&Packet> {
        self.packets.front()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Packet> + '_ {
        self.packets.iter()
    }
}

/// Which sub-queue transmits next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Lda,
    Aoi,
    Idle,
}

impl Decision {
    /// Serve `preferred` if it has packets, else the other class, else idle.
    pub fn work_conserving(preferred: FlowClass, lda_empty: bool, aoi_empty: bool) -> Self {
        match (preferred, lda_empty, aoi_empty) {
            (_, true, true) => Decision::Idle,
            (FlowClass::Aoi, _, false) | (FlowClass::Lda, true, false) => Decision::Aoi,
            _ => Decision::Lda,
        }
    }

    pub fn class(self) -> Option<FlowClass> {
        match self {
            Decision::Lda => Some(FlowClass::Lda),
            Decision::Aoi => Some(FlowClass::Aoi),
            Decision::Idle => None,
        }
    }
}

/// Size-division multiplexing: a signed bit budget steers service toward the AoI share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdmState {
    pub budget_bits: f64,
    pub gamma: f64,
}

impl SdmState {
    pub fn new(gamma: f64) -> Self {
        Self {
            budget_bits: 0.0,
            gamma: gamma.clamp(0.0, 1.0),
        }
    }

    pub fn account(&mut self, class: FlowClass, size_bits: f64) {
        match class {
            FlowClass::Lda => self.budget_bits += self.gamma * size_bits,
            FlowClass::Aoi => self.budget_bits -= (1.0 - self.gamma) * size_bits,
        }
    }

    pub fn decide(&self, lda_empty: bool, aoi_empty: bool) -> Decision {
        let preferred = if self.budget_bits > 0.0 {
            FlowClass::Aoi
        } else {
            FlowClass::Lda
        };
        Decision::work_conserving(preferred, lda_empty, aoi_empty)
    }
}

/// Time-division multiplexing: alternating LDA and AoI phases of `(1-gamma) T` and
/// `gamma T`, starting with LDA at time zero.
///
/// A transmission that runs past the end of the phase it started in by `d` pushes the
/// next phase to start when it finishes, and lengthens that phase by
/// `d * share(next) / share(overrun)` so each class keeps its share of time.
#[derive(Debug, Clone, PartialEq)]
pub struct TdmState {
    pub frame_s: f64,
    pub gamma: f64,
    pub phase: FlowClass,
    pub phase_start_s: f64,
    pub phase_end_s: f64,
    /// Total extension granted to each class so far, `[lda, aoi]`.
    pub carryover_s: [f64; 2],
}

impl TdmState {
    pub fn new(frame_s: f64, gamma: f64) -> Self {
        let gamma = gamma.clamp(0.0, 1.0);
        Self {
            frame_s,
            gamma,
            phase: FlowClass::Lda,
            phase_start_s: 0.0,
            phase_end_s: (1.0 - gamma) * frame_s,
            carryover_s: [0.0; 2],
        }
    }

    pub fn share(&self, class: FlowClass) -> f64 {
        match class {
            FlowClass::Lda => 1.0 - self.gamma,
            FlowClass::Aoi => self.gamma,
        }
    }

    fn phase_len(&self, class: FlowClass) -> f64 {
        self.share(class) * self.frame_s
    }

    /// Boundaries closer than this are treated as equal, so rounding in the accumulated
    /// phase ends cannot flip a decision.
    fn tolerance(&self) -> f64 {
        1e-9 * self.frame_s
    }

    /// Moves the phase forward until `now_s` falls inside it.
    pub fn advance(&mut self, now_s: f64) {
        if !(self.frame_s > 0.0) {
            return;
        }
        let tol = self.tolerance();
        while now_s + tol >= self.phase_end_s {
            // skip whole idle frames at once
            let behind = now_s - self.phase_end_s;
            if behind >= self.frame_s {
                let frames = (behind / self.frame_s).floor();
                self.phase_end_s += frames * self.frame_s;
            }
            let next = other(self.phase);
            self.phase_start_s = self.phase_end_s;
            self.phase_end_s += self.phase_len(next);
            self.phase = next;
        }
    }

    pub fn decide(&mut self, now_s: f64, lda_empty: bool, aoi_empty: bool) -> Decision {
        self.advance(now_s);
        Decision::work_conserving(self.phase, lda_empty, aoi_empty)
    }

    /// Records a transmission over `[tx_start_s, tx_end_s]`.
    pub fn account(&mut self, tx_start_s: f64, tx_end_s: f64) {
        self.advance(tx_start_s);
        let overrun = tx_end_s - self.phase_end_s;
        if overrun <= self.tolerance() {
            return;
        }
        let own = self.phase;
        let next = other(own);
        let extension = overrun * self.share(next) / self.share(own);
        self.carryover_s[next as usize] += extension;
        self.phase = next;
        self.phase_start_s = tx_end_s;
        self.phase_end_s = tx_end_s + self.phase_len(next) + extension;
    }
}

fn other(class: FlowClass) -> FlowClass {
    match class {
        FlowClass::Lda => FlowClass::Aoi,
        FlowClass::Aoi => FlowClass::Lda,
    }
}

/// Scheduler between the two sub-queues.
#[derive(Debug, Clone, PartialEq)]
pub enum AaqScheduler {
    Sdm(SdmState),
    Tdm(TdmState),
}

/// Both sub-queues and their scheduler.
#[derive(Debug, Clone)]
pub struct Aaq {
    pub lda: FifoQueue,
    pub aoi: IfilQueue,
    pub scheduler: AaqScheduler,
}

impl Aaq {
    pub fn new(lda: FifoQueue, aoi: IfilQueue, scheduler: AaqScheduler) -> Self {
        Self {
            lda,
            aoi,
            scheduler,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lda.is_empty() && self.aoi.is_empty()
    }

    pub fn decide(&mut self, now_s: f64) -> Decision {
        let (le, ae) = (self.lda.is_empty(), self.aoi.is_empty());
        match &mut self.scheduler {
            AaqScheduler::Sdm(s) => s.decide(le, ae),
            AaqScheduler::Tdm(t) => t.decide(now_s, le, ae),
        }
    }

    /// Takes the next packet to send at `now_s`, if any.
    pub fn pop(&mut self, now_s: f64) -> Option<(FlowClass, Packet)> {
        match self.decide(now_s) {
            Decision::Lda => self.lda.dequeue().map(|p| (FlowClass::Lda, p)),
            Decision::Aoi => self.aoi.dequeue().map(|p| (FlowClass::Aoi, p)),
            Decision::Idle => None,
        }
    }

    /// Charges a transmission to the scheduler.
    pub fn account(&mut self, class: FlowClass, size_bits: f64, tx_start_s: f64, tx_end_s: f64) {
        match &mut self.scheduler {
            AaqScheduler::Sdm(s) => s.account(class, size_bits),
            AaqScheduler::Tdm(t) => t.account(tx_start_s, tx_end_s),
        }
    }
}
