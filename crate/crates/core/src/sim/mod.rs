//! Discrete-event simulation: engine, mobility, scenarios, the run loop and
//! its traces.

mod engine;
mod mobility;
mod runner;
mod scenario;
mod trace;

use thiserror::Error;

pub use engine::{Event, EventKind, EventQueue, PastEvent};
pub use mobility::{advance_mobility, distance, time_to_reach, MobilityState};
pub use runner::{run, stream_rng, EventCounts, RunOutput, Simulation, Stream, MIN_DISTANCE};
pub use scenario::{
    BaseStationSpec, ChannelSection, LinkStateMode, RadioSection, RunSection, Scenario, ScenarioError,
    TopologySection, Traffic, UserSpec, DEFAULT_MAX_DISTANCE, DEFAULT_PACKET_BITS,
};
pub use trace::{
    average_sinr_vs_distance, read_channel_grid, read_slot_traces, read_slot_traces_file, throughput_vs_time,
    write_channel_grid, write_sap_log, write_slot_traces, DistanceBin, GridEvent, GridRow, SlotOutcome, SlotTrace,
    ThroughputPoint, SLOT_TRACE_HEADER,
};

use crate::channel::ChannelError;
use crate::mac::MacError;
use crate::phy::PhyError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidScenario(Vec<ScenarioError>),
    #[error("run length is unbounded; set run.duration")]
    UnboundedRun,
    #[error("pool antennas {found:?} do not match the configured {expected:?} (tx, rx)")]
    PoolMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("no traces to summarise")]
    EmptyTraces,
    #[error("window and bin widths must be finite and > 0")]
    NonPositiveWindow,
    #[error("malformed trace: {0}")]
    Trace(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Mac(#[from] MacError),
    #[error(transparent)]
    Event(#[from] PastEvent),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
