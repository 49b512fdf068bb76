//! Messages exchanged between PHY, MAC and scheduler, and their log format.
//!
//! One message per line: `time_ns bs message key=value ...`, keys in the
//! order they are listed on each variant.

use std::fmt;

use super::scheduler::{AllocationMap, CqiReport};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SapMessage {
    /// `frame subframe slot`; `slot` is 1-based.
    SubframeIndication { frame: u64, subframe: u64, slot: u32 },
    /// `target_subframe`.
    SchedTriggerReq { target_subframe: u64 },
    /// `subframe allocation`.
    SchedConfigInd(AllocationMap),
    /// `subframe allocation`.
    ResourceAllocation(AllocationMap),
    /// `user cqi subframe slot`.
    CqiReport(CqiReport),
}

impl SapMessage {
    pub fn name(&self) -> &'static str {
        match self {
            SapMessage::SubframeIndication { .. } => "SubframeIndication",
            SapMessage::SchedTriggerReq { .. } => "SchedTriggerReq",
            SapMessage::SchedConfigInd(_) => "SchedConfigInd",
            SapMessage::ResourceAllocation(_) => "ResourceAllocationMsg",
            SapMessage::CqiReport(_) => "CqiReport",
        }
    }

    /// Space-separated `key=value` fields.
    pub fn fields(&self) -> String {
        match self {
            SapMessage::SubframeIndication { frame, subframe, slot } => {
                format!("frame={frame} subframe={subframe} slot={slot}")
            }
            SapMessage::SchedTriggerReq { target_subframe } => format!("target_subframe={target_subframe}"),
            SapMessage::SchedConfigInd(m) | SapMessage::ResourceAllocation(m) => {
                format!("subframe={} allocation={}", m.subframe, m.compact())
            }
            SapMessage::CqiReport(r) => {
                format!("user={} cqi={} subframe={} slot={}", r.user, r.cqi, r.subframe, r.slot)
            }
        }
    }
}

impl fmt::Display for SapMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name(), self.fields())
    }
}

/// A message stamped with its time and base station.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SapRecord {
    pub time_ns: u64,
    pub bs: usize,
    pub message: SapMessage,
}

impl fmt::Display for SapRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.time_ns, self.bs, self.message)
    }
}

/// PHY-side slot indication handling: slot 1 of each subframe requests a
/// scheduling decision for `subframe + latency`.
pub fn on_subframe_indication(slot: u32, subframe: u64, latency: u32) -> Option<SapMessage> {
    (slot == 1).then_some(SapMessage::SchedTriggerReq {
        target_subframe: subframe + latency as u64,
    })
}
