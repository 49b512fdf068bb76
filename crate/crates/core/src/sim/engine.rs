//! Discrete-event queue ordered by integer-nanosecond time and insertion order.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    FrameStart { frame: u64 },
    SubframeStart { subframe: u64 },
    /// `global_slot` counts slots from the start of the run.
    SlotStart { global_slot: u64 },
    LargeScaleUpdate { index: u64 },
    TrafficArrival { user: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub time_ns: u64,
    pub seq: u64,
    pub kind: EventKind,
}

impl Event {
    pub fn time_s(&self) -> f64 {
        self.time_ns as f64 * 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("event at {at} ns scheduled while the clock reads {now} ns")]
pub struct PastEvent {
    pub at: u64,
    pub now: u64,
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    now: u64,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now_ns(&self) -> u64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn schedule(&mut self, time_ns: u64, kind: EventKind) -> Result<u64, PastEvent> {
        if time_ns < self.now {
            return Err(PastEvent { at: time_ns, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Event { time_ns, seq, kind }));
        Ok(seq)
    }

    /// Next event by `(time, seq)`; advances the clock.
    pub fn pop(&mut self) -> Option<Event> {
        let Reverse(ev) = self.heap.pop()?;
        self.now = ev.time_ns;
        Some(ev)
    }
}
