//! Per-user MAC transmit queues.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub id: u64,
    pub bits: u32,
}

/// Packets sent in one slot and the filler that completes the TB.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Burst {
    pub packets: Vec<Packet>,
    pub padding_bits: u32,
}

impl Burst {
    pub fn payload_bits(&self) -> u64 {
        self.packets.iter().map(|p| p.bits as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }
}

/// Unbounded FIFO of whole packets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserQueue {
    packets: VecDeque<Packet>,
    next_id: u64,
}

impl UserQueue {
    pub fn push(&mut self, bits: u32) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        self.packets.push_back(Packet { id, bits });
        id
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn occupancy_bits(&self) -> u64 {
        self.packets.iter().map(|p| p.bits as u64).sum()
    }
}

/// Takes whole packets from the head while they fit in `tb_size` bits; the
/// rest of the TB is padding.
pub fn dequeue_for_slot(queue: &mut UserQueue, tb_size: u32) -> Burst {
    let mut burst = Burst::default();
    if tb_size == 0 {
        return burst;
    }
    let mut room = tb_size;
    while let Some(p) = queue.packets.front() {
        if p.bits > room {
            break;
        }
        room -= p.bits;
        burst.packets.push(queue.packets.pop_front().expect("front exists"));
    }
    burst.padding_bits = room;
    burst
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_queue_gives_empty_burst() {
        let mut q = UserQueue::default();
        assert!(dequeue_for_slot(&mut q, 5000).is_empty());
    }

    #[test]
    fn whole_packets_then_padding() {
        let mut q = UserQueue::default();
        q.push(1000);
        q.push(1000);
        let b = dequeue_for_slot(&mut q, 1500);
        assert_eq!(b.packets.len(), 1);
        assert_eq!(b.packets[0].id, 0);
        assert_eq!(b.padding_bits, 500);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn zero_tb_leaves_queue() {
        let mut q = UserQueue::default();
        q.push(10);
        assert!(dequeue_for_slot(&mut q, 0).is_empty());
        assert_eq!(q.len(), 1);
    }

    proptest! {
        #[test]
        fn fifo_and_capacity(sizes in proptest::collection::vec(1u32..5000, 0..40), tb in 0u32..20_000) {
            let mut q = UserQueue::default();
            for s in &sizes {
                q.push(*s);
            }
            let before = q.occupancy_bits();
            let b = dequeue_for_slot(&mut q, tb);
            prop_assert!(b.payload_bits() <= tb as u64);
            let ids: Vec<u64> = b.packets.iter().map(|p| p.id).collect();
            prop_assert_eq!(ids, (0..b.packets.len() as u64).collect::<Vec<_>>());
            prop_assert_eq!(before, b.payload_bits() + q.occupancy_bits());
        }
    }
}
