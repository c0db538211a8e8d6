//! Allocation, scheduling and simulation for networks that carry both legacy
//! drop-adverse (LDA) traffic and age-of-information (AoI) status updates.
//!
//! [`opt`] computes sending rates and update frequencies, [`aaq`] holds the per-port
//! queues and schedulers, [`sim`] runs them packet by packet, and [`closed_form`] gives
//! the single-link predictions the simulator is checked against.

pub mod aaq;
pub mod closed_form;
pub mod harness;
pub mod model;
pub mod opt;
pub mod sim;
pub mod time;

pub use model::{FlowClass, FlowId, FlowSpec, Link, LinkId, Network, RateAllocation};
pub use opt::{solve, Objective, Solution, SolveError, SolverConfig};
pub use sim::{Scenario, SchedulerKind, SimConfig, SimReport};
pub use time::SimTime;

// The book chapters compile and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/allocation.md")]
    mod allocation {}
    #[doc = include_str!("../../../book/src/queueing.md")]
    mod queueing {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/formulas.md")]
    mod formulas {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
