//! Round-robin slot scheduler and the per-user CQI state it reads.

use std::collections::BTreeMap;

use super::amc::{tb_size_for_symbols, AmcTable};
use super::tdd::{direction_switch, Direction, SlotLayout};
use super::MacError;
use crate::config::{FrameConfig, SlotKind};
use crate::phy::MAX_CQI;

pub type UserId = u32;

/// CQI assumed for a user before any report arrives.
pub const INITIAL_CQI: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotAssignment {
    /// 0-based slot within the subframe.
    pub slot: u32,
    pub kind: SlotKind,
    pub direction: Direction,
    pub user: Option<UserId>,
    pub cqi: u8,
    pub mcs: Option<u8>,
    pub tb_size: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationMap {
    pub subframe: u64,
    pub assignments: Vec<SlotAssignment>,
}

impl AllocationMap {
    /// Map with every slot left unassigned.
    pub fn empty(subframe: u64, layout: &[SlotLayout]) -> Self {
        Self {
            subframe,
            assignments: layout
                .iter()
                .enumerate()
                .map(|(i, s)| SlotAssignment {
                    slot: i as u32,
                    kind: s.kind,
                    direction: s.direction,
                    user: None,
                    cqi: 0,
                    mcs: None,
                    tb_size: 0,
                })
                .collect(),
        }
    }

    /// `slot:dir kind user/mcs/tb` entries joined by `;`, `-` for no user.
    pub fn compact(&self) -> String {
        self.assignments
            .iter()
            .map(|a| {
                let who = match (a.user, a.mcs) {
                    (Some(u), Some(m)) => format!("{u}/{m}/{}", a.tb_size),
                    (Some(u), None) => format!("{u}/-/{}", a.tb_size),
                    _ => "-".to_string(),
                };
                format!("{}:{}{} {who}", a.slot, a.direction.as_str(), a.kind.as_char())
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CqiReport {
    pub user: UserId,
    pub cqi: u8,
    /// Absolute subframe and 0-based slot of the measurement.
    pub subframe: u64,
    pub slot: u32,
}

/// Latest wideband CQI per attached user.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CqiState {
    latest: BTreeMap<UserId, CqiReport>,
}

impl CqiState {
    pub fn attach(&mut self, user: UserId) {
        self.latest.entry(user).or_insert(CqiReport {
            user,
            cqi: INITIAL_CQI,
            subframe: 0,
            slot: 0,
        });
    }

    pub fn detach(&mut self, user: UserId) {
        self.latest.remove(&user);
    }

    pub fn cqi(&self, user: UserId) -> Option<u8> {
        self.latest.get(&user).map(|r| r.cqi)
    }

    /// Stores the report unless a later measurement is already held.
    pub fn relay_cqi(&mut self, report: CqiReport) -> Result<(), MacError> {
        if report.cqi > MAX_CQI {
            return Err(MacError::CqiOutOfRange(report.cqi));
        }
        let slot = self
            .latest
            .get_mut(&report.user)
            .ok_or(MacError::UnknownUser(report.user))?;
        if (report.subframe, report.slot) >= (slot.subframe, slot.slot) {
            *slot = report;
        }
        Ok(())
    }
}

/// Next user to serve in each direction, as indices into the user list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Cursors {
    pub downlink: usize,
    pub uplink: usize,
}

fn pick(users: &[UserId], cursor: &mut usize, eligible: impl Fn(UserId) -> bool) -> UserId {
    let n = users.len();
    let start = *cursor % n;
    let idx = (0..n)
        .map(|j| (start + j) % n)
        .find(|&i| eligible(users[i]))
        .unwrap_or(start);
    *cursor = (idx + 1) % n;
    users[idx]
}

/// One subframe of round-robin allocation. Every data slot of a direction
/// goes to the next user in cyclic order; users reporting CQI 0 are skipped
/// while anyone else has a usable CQI. Control slots stay unassigned.
pub fn schedule_round_robin(
    subframe: u64,
    users: &[UserId],
    cursors: Cursors,
    layout: &[SlotLayout],
    cqi: &CqiState,
    amc: &AmcTable,
    cfg: &FrameConfig,
) -> (AllocationMap, Cursors) {
    let mut map = AllocationMap::empty(subframe, layout);
    if users.is_empty() {
        return (map, cursors);
    }
    let mut cur = cursors;
    let cqi_of = |u| cqi.cqi(u).unwrap_or(INITIAL_CQI);
    let any_usable = users.iter().any(|&u| cqi_of(u) >= 1);
    let eligible = |u| !any_usable || cqi_of(u) >= 1;
    for (i, a) in map.assignments.iter_mut().enumerate() {
        if a.kind != SlotKind::Data {
            continue;
        }
        let cursor = match a.direction {
            Direction::Downlink => &mut cur.downlink,
            Direction::Uplink => &mut cur.uplink,
        };
        let user = pick(users, cursor, eligible);
        let c = cqi_of(user);
        a.user = Some(user);
        a.cqi = c;
        a.mcs = amc.cqi_to_mcs(c);
        a.tb_size = tb_size_for_symbols(c, amc, cfg, cfg.data_symbols(direction_switch(layout, i)));
    }
    (map, cur)
}

/// Owns the scheduler state of one base station and the allocations decided
/// ahead of the subframes they govern.
#[derive(Debug, Clone)]
pub struct RoundRobinScheduler {
    users: Vec<UserId>,
    cursors: Cursors,
    cqi: CqiState,
    layout: Vec<SlotLayout>,
    amc: AmcTable,
    pending: BTreeMap<u64, AllocationMap>,
}

impl RoundRobinScheduler {
    pub fn new(layout: Vec<SlotLayout>, amc: AmcTable) -> Self {
        Self {
            users: Vec::new(),
            cursors: Cursors::default(),
            cqi: CqiState::default(),
            layout,
            amc,
            pending: BTreeMap::new(),
        }
    }

    pub fn attach(&mut self, user: UserId) {
        if !self.users.contains(&user) {
            self.users.push(user);
            self.cqi.attach(user);
        }
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn cqi_state(&self) -> &CqiState {
        &self.cqi
    }

    pub fn relay_cqi(&mut self, report: CqiReport) -> Result<(), MacError> {
        self.cqi.relay_cqi(report)
    }

    /// Decides the allocation for `target_subframe` and keeps it until taken.
    pub fn schedule(&mut self, target_subframe: u64, cfg: &FrameConfig) -> &AllocationMap {
        let (map, cur) = schedule_round_robin(
            target_subframe,
            &self.users,
            self.cursors,
            &self.layout,
            &self.cqi,
            &self.amc,
            cfg,
        );
        self.cursors = cur;
        self.pending.insert(target_subframe, map);
        &self.pending[&target_subframe]
    }

    /// Allocation governing `subframe`; empty if none was decided for it.
    pub fn take(&mut self, subframe: u64) -> AllocationMap {
        self.pending.retain(|&k, _| k >= subframe);
        self.pending
            .remove(&subframe)
            .unwrap_or_else(|| AllocationMap::empty(subframe, &self.layout))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::tdd::assign_tdd_slots;
    use proptest::prelude::*;

    fn layout() -> Vec<SlotLayout> {
        let cfg = FrameConfig::<f64>::default();
        assign_tdd_slots(cfg.tdd_pattern())
    }

    fn state(users: &[(UserId, u8)]) -> CqiState {
        let mut s = CqiState::default();
        for &(u, c) in users {
            s.attach(u);
            s.relay_cqi(CqiReport { user: u, cqi: c, subframe: 1, slot: 0 }).unwrap();
        }
        s
    }

    fn dl_users(map: &AllocationMap) -> Vec<UserId> {
        map.assignments
            .iter()
            .filter(|a| a.kind == SlotKind::Data && a.direction == Direction::Downlink)
            .map(|a| a.user.unwrap())
            .collect()
    }

    #[test]
    fn single_user_takes_every_data_slot() {
        let cfg = FrameConfig::default();
        let (map, _) =
            schedule_round_robin(0, &[7], Cursors::default(), &layout(), &state(&[(7, 5)]), &AmcTable::lte(), &cfg);
        let data: Vec<_> = map.assignments.iter().filter(|a| a.kind == SlotKind::Data).collect();
        assert_eq!(data.len(), 6);
        assert!(data.iter().all(|a| a.user == Some(7) && a.mcs == Some(4)));
        assert!(map.assignments.iter().filter(|a| a.kind == SlotKind::Control).all(|a| a.user.is_none()));
    }

    #[test]
    fn two_users_continue_from_cursor() {
        let cfg = FrameConfig::default();
        let (s, l, amc) = (state(&[(1, 3), (2, 3)]), layout(), AmcTable::lte());
        let (m, cur) = schedule_round_robin(0, &[1, 2], Cursors::default(), &l, &s, &amc, &cfg);
        assert_eq!(dl_users(&m), vec![1, 2, 1]);
        let (m, _) = schedule_round_robin(1, &[1, 2], cur, &l, &s, &amc, &cfg);
        assert_eq!(dl_users(&m), vec![2, 1, 2]);
    }

    #[test]
    fn no_users_no_assignments() {
        let cfg = FrameConfig::default();
        let (m, _) =
            schedule_round_robin(0, &[], Cursors::default(), &layout(), &CqiState::default(), &AmcTable::lte(), &cfg);
        assert!(m.assignments.iter().all(|a| a.user.is_none() && a.tb_size == 0));
        assert_eq!(m.assignments.len(), 8);
    }

    #[test]
    fn out_of_range_users_are_skipped() {
        let cfg = FrameConfig::default();
        let s = state(&[(1, 0), (2, 9), (3, 0)]);
        let (m, _) = schedule_round_robin(0, &[1, 2, 3], Cursors::default(), &layout(), &s, &AmcTable::lte(), &cfg);
        assert!(m.assignments.iter().filter(|a| a.kind == SlotKind::Data).all(|a| a.user == Some(2)));
        // nobody usable: slots still go round, carrying nothing
        let s = state(&[(1, 0), (2, 0)]);
        let (m, _) = schedule_round_robin(0, &[1, 2], Cursors::default(), &layout(), &s, &AmcTable::lte(), &cfg);
        assert_eq!(dl_users(&m), vec![1, 2, 1]);
        assert!(m.assignments.iter().all(|a| a.tb_size == 0));
    }

    #[test]
    fn guard_slot_carries_fewer_bits() {
        let cfg = FrameConfig::default();
        let (m, _) =
            schedule_round_robin(0, &[1], Cursors::default(), &layout(), &state(&[(1, 15)]), &AmcTable::lte(), &cfg);
        let sizes: Vec<u32> = m.assignments.iter().map(|a| a.tb_size).collect();
        assert!(sizes[2] < sizes[3]);
        assert_eq!(sizes[3], sizes[4]);
        assert!(sizes[5] < sizes[6]);
    }

    #[test]
    fn cqi_relay_rules() {
        let mut s = state(&[(1, 4)]);
        s.relay_cqi(CqiReport { user: 1, cqi: 9, subframe: 3, slot: 2 }).unwrap();
        assert_eq!(s.cqi(1), Some(9));
        // an older measurement arriving late does not overwrite
        s.relay_cqi(CqiReport { user: 1, cqi: 2, subframe: 3, slot: 1 }).unwrap();
        assert_eq!(s.cqi(1), Some(9));
        s.relay_cqi(CqiReport { user: 1, cqi: 11, subframe: 3, slot: 4 }).unwrap();
        assert_eq!(s.cqi(1), Some(11));
        let before = s.clone();
        assert_eq!(
            s.relay_cqi(CqiReport { user: 5, cqi: 3, subframe: 9, slot: 0 }),
            Err(MacError::UnknownUser(5))
        );
        assert_eq!(s, before);
    }

    #[test]
    fn scheduler_holds_allocations_until_their_subframe() {
        let cfg = FrameConfig::default();
        let mut rr = RoundRobinScheduler::new(layout(), AmcTable::lte());
        rr.attach(4);
        rr.schedule(2, &cfg);
        assert!(rr.take(0).assignments.iter().all(|a| a.user.is_none()));
        assert!(rr.take(1).assignments.iter().all(|a| a.user.is_none()));
        assert_eq!(rr.take(2).assignments[2].user, Some(4));
    }

    proptest! {
        #[test]
        fn fairness_over_u_subframes(n_users in 1usize..7, rounds in 1usize..6) {
            let cfg = FrameConfig::default();
            let users: Vec<UserId> = (0..n_users as u32).collect();
            let s = state(&users.iter().map(|&u| (u, 6)).collect::<Vec<_>>());
            let mut cur = Cursors::default();
            let mut counts = vec![0usize; n_users];
            for sf in 0..(n_users * rounds) as u64 {
                let (m, c) = schedule_round_robin(sf, &users, cur, &layout(), &s, &AmcTable::lte(), &cfg);
                cur = c;
                for u in dl_users(&m) {
                    counts[u as usize] += 1;
                }
                let kinds: String = m.assignments.iter().map(|a| a.kind.as_char()).collect();
                prop_assert_eq!(kinds, cfg.pattern_string());
            }
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
        }
    }
}
