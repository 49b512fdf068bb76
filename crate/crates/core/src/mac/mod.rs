//! MAC layer: TDD layout, AMC, round-robin scheduling, queues and SAP messages.

mod amc;
mod queue;
mod sap;
mod scheduler;
mod tdd;

use thiserror::Error;

pub use amc::{
    cqi_to_tb_size, derive_cqi_table, flat_sinr_bler, tb_size_for_symbols, tb_size_ladder, AmcEntry, AmcTable,
};
pub use queue::{dequeue_for_slot, Burst, Packet, UserQueue};
pub use sap::{on_subframe_indication, SapMessage, SapRecord};
pub use scheduler::{
    schedule_round_robin, AllocationMap, CqiReport, CqiState, Cursors, RoundRobinScheduler, SlotAssignment, UserId,
    INITIAL_CQI,
};
pub use tdd::{assign_tdd_slots, direction_switch, Direction, SlotLayout};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MacError {
    #[error("CQI report for unknown user {0}")]
    UnknownUser(UserId),
    #[error("CQI {0} outside 0..=15")]
    CqiOutOfRange(u8),
}
