//! Dynamic flexible job shop: instance generation and event-driven
//! simulation of a routing/sequencing rule pair.

mod audit;
mod config;
mod context;
mod engine;
mod instance;
mod objectives;
mod scenario;

use thiserror::Error;

pub use audit::{audit_schedule, Violation};
pub use config::{arrival_rate_for_shop, arrival_rate_for_utilization, SimConfig};
pub use context::{build_routing_context, build_sequencing_context, MachineView, OpView};
pub use engine::{simulate, simulate_with, EventKind, ScheduledOp, SimOptions, SimOutcome, TraceEvent};
pub use instance::{generate_instance, median, Instance, Job, Location, Operation};
pub use objectives::{compute_objectives, CompletedJob, Objective, ObjectiveVector};
pub use scenario::{default_test_seeds, default_training_seeds, weighted_fitness, Scenario};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid instance data: {0}")]
    Data(String),
    #[error("no counted jobs to compute objectives over")]
    NoCountedJobs,
    #[error("rule produced a non-finite priority")]
    NonFinitePriority,
    #[error("simulation stalled at t={time} with {remaining} counted jobs unfinished")]
    Stalled { time: f64, remaining: usize },
    #[error("normalized fitness needs reference objectives")]
    MissingReference,
    #[error("reference value for {0} is zero; cannot normalize")]
    ZeroReference(Objective),
}
