//! The simulation loop: one event queue driving channel evolution, PHY
//! reception and the MAC of every base station.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::engine::{EventKind, EventQueue};
use super::mobility::{advance_mobility, distance};
use super::scenario::{Scenario, Traffic};
use super::trace::{GridEvent, GridRow, SlotOutcome, SlotTrace};
use super::SimError;
use crate::channel::{
    assemble_channel, doppler_from_speed, generate_realization_pool, load_pool, pathloss_db,
    power_iteration_beamforming, select_link_state, update_large_scale, BeamformingPair, ChannelRealization,
    LinkState, PathlossParams, ProjectedChannel, RealizationPool,
};
use crate::config::SlotKind;
use crate::mac::{
    assign_tdd_slots, derive_cqi_table, dequeue_for_slot, on_subframe_indication, AllocationMap, AmcTable,
    CqiReport, Direction, RoundRobinScheduler, SapMessage, SapRecord, SlotLayout, UserId, UserQueue,
};
use crate::phy::{
    compute_sinr, decide_decode, mean_mmib, subband_cqi, thermal_noise_psd, CqiTable, DecodeOutcome, LinkPower,
    MiesmTable, TransportBlock,
};
use crate::scalar::{db_to_linear, linear_to_db};

/// Pathloss is evaluated no closer than this, metres.
pub const MIN_DISTANCE: f64 = 1.0;

/// Independent random streams derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    LinkState = 1,
    Shadowing = 2,
    LargeScale = 3,
    Decode = 4,
    Pool = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub frames: u64,
    pub subframes: u64,
    pub slots: u64,
    pub large_scale_updates: u64,
    pub traffic_arrivals: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub slot_traces: Vec<SlotTrace>,
    pub sap_log: Vec<SapRecord>,
    pub channel_grid: Vec<GridRow>,
    pub counts: EventCounts,
    pub duration_ns: u64,
    pub tti_ns: u64,
    pub miesm_digest: String,
    pub cqi_table: CqiTable,
}

struct Link {
    bs: usize,
    user: usize,
    realization: ChannelRealization,
    /// Present on serving links only.
    beam: Option<BeamformingPair>,
}

struct User {
    id: UserId,
    spec: super::scenario::UserSpec,
    serving: usize,
    queue: UserQueue,
    pending_cqi: Option<CqiReport>,
}

/// Per-BS transmission in the current DL slot.
struct Tx {
    bs: usize,
    user: usize,
    mcs: u8,
    tb_size: u32,
    cqi: u8,
}

pub struct Simulation<'a> {
    sc: &'a Scenario,
    miesm: MiesmTable,
    amc: AmcTable,
    cqi_table: CqiTable,
    pool: RealizationPool,
    layout: Vec<SlotLayout>,
    users: Vec<User>,
    links: Vec<Link>,
    schedulers: Vec<RoundRobinScheduler>,
    current: Vec<AllocationMap>,
    projections: BTreeMap<(usize, usize), ProjectedChannel>,
    rng_state: ChaCha8Rng,
    rng_shadow: ChaCha8Rng,
    rng_large: ChaCha8Rng,
    rng_decode: ChaCha8Rng,
    out: RunOutput,
}

fn pathloss_params(sc: &Scenario, state: LinkState) -> Option<&PathlossParams> {
    match state {
        LinkState::Los => Some(&sc.channel.los),
        LinkState::Nlos => Some(&sc.channel.nlos),
        LinkState::Outage => None,
    }
}

fn pathloss_linear(db: f64) -> f64 {
    if db == f64::INFINITY {
        f64::INFINITY
    } else {
        db_to_linear(db)
    }
}

/// Runs a validated scenario to completion.
pub fn run(sc: &Scenario) -> Result<RunOutput, SimError> {
    Simulation::new(sc)?.run()
}

impl<'a> Simulation<'a> {
    pub fn new(sc: &'a Scenario) -> Result<Self, SimError> {
        let errors = sc.validate();
        if !errors.is_empty() {
            return Err(SimError::InvalidScenario(errors));
        }
        let duration_ns = sc.duration_ns().ok_or(SimError::UnboundedRun)?;
        let seed = sc.run.seed;
        let ch = &sc.channel;
        let pool: RealizationPool = match &ch.pool_file {
            Some(p) => load_pool(p)?,
            None => {
                let pool_seed = stream_rng(seed, Stream::Pool).random::<u64>();
                generate_realization_pool(pool_seed, ch.pool_size, &ch.cluster, ch.tx_antennas, ch.rx_antennas)?
            }
        };
        if let Some(e) = pool
            .entries()
            .iter()
            .find(|e| e.tx_antennas() != ch.tx_antennas || e.rx_antennas() != ch.rx_antennas)
        {
            return Err(SimError::PoolMismatch {
                expected: (ch.tx_antennas, ch.rx_antennas),
                found: (e.tx_antennas(), e.rx_antennas()),
            });
        }
        let miesm = MiesmTable::bundled();
        let amc = AmcTable::lte();
        let cqi_table = derive_cqi_table(&amc, &miesm, &sc.frame, sc.radio.bler_target, sc.radio.max_cb_size)?;
        let layout = assign_tdd_slots(sc.frame.tdd_pattern());
        let n_bs = sc.topology.base_stations.len();
        let mut schedulers: Vec<_> = (0..n_bs)
            .map(|_| RoundRobinScheduler::new(layout.clone(), amc.clone()))
            .collect();
        let users: Vec<User> = sc
            .topology
            .users
            .iter()
            .enumerate()
            .map(|(i, u)| User {
                id: i as UserId,
                spec: u.clone(),
                serving: sc.topology.serving_bs(u).expect("validated: at least one base station"),
                queue: UserQueue::default(),
                pending_cqi: None,
            })
            .collect();
        for u in &users {
            schedulers[u.serving].attach(u.id);
        }
        let current = (0..n_bs).map(|_| AllocationMap::empty(0, &layout)).collect();
        let mut sim = Self {
            sc,
            miesm: miesm.clone(),
            amc: amc.clone(),
            cqi_table: cqi_table.clone(),
            pool,
            layout,
            users,
            links: Vec::new(),
            schedulers,
            current,
            projections: BTreeMap::new(),
            rng_state: stream_rng(seed, Stream::LinkState),
            rng_shadow: stream_rng(seed, Stream::Shadowing),
            rng_large: stream_rng(seed, Stream::LargeScale),
            rng_decode: stream_rng(seed, Stream::Decode),
            out: RunOutput {
                slot_traces: Vec::new(),
                sap_log: Vec::new(),
                channel_grid: Vec::new(),
                counts: EventCounts::default(),
                duration_ns,
                tti_ns: sc.frame.tti_ns(),
                miesm_digest: miesm.digest().to_string(),
                cqi_table,
            },
        };
        sim.attach_links()?;
        Ok(sim)
    }

    fn link_index(&self, bs: usize, user: usize) -> usize {
        bs * self.users.len() + user
    }

    fn distance_at(&self, bs: usize, user: usize, t: f64) -> f64 {
        let pos = advance_mobility(&self.users[user].spec.mobility(), t);
        distance(pos, self.sc.topology.base_stations[bs].position).max(MIN_DISTANCE)
    }

    fn doppler(&self, user: usize) -> f64 {
        doppler_from_speed(self.users[user].spec.mobility().speed(), self.sc.frame.center_freq())
    }

    /// State and shadowing for a (re)selection at distance `d`.
    fn draw_large_scale(&mut self, d: f64) -> Result<(LinkState, f64), SimError> {
        let state = match self.sc.run.link_state.pinned() {
            Some(s) => s,
            None => {
                let u: f64 = self.rng_state.random();
                select_link_state(d, &self.sc.channel.link_state_model, u)?
            }
        };
        let z: f64 = self.rng_shadow.sample(StandardNormal);
        let sigma = pathloss_params(self.sc, state).map_or(0.0, |p| p.sigma);
        Ok((state, z * sigma))
    }

    fn attach_links(&mut self) -> Result<(), SimError> {
        let n_bs = self.sc.topology.base_stations.len();
        for bs in 0..n_bs {
            for user in 0..self.users.len() {
                let d = self.distance_at(bs, user, 0.0);
                let (state, shadow) = self.draw_large_scale(d)?;
                let realization = ChannelRealization::draw(&self.pool, state, shadow, 0.0, &mut self.rng_large);
                self.links.push(Link {
                    bs,
                    user,
                    realization,
                    beam: None,
                });
            }
        }
        self.refresh_beams(0.0)?;
        Ok(())
    }

    fn refresh_beams(&mut self, t: f64) -> Result<(), SimError> {
        for u in 0..self.users.len() {
            let l = self.link_index(self.users[u].serving, u);
            let fd = self.doppler(u);
            let h = assemble_channel(&self.links[l].realization.spatial, t, 0.0, fd);
            self.links[l].beam = Some(power_iteration_beamforming(&h, self.sc.channel.beamforming)?);
        }
        self.projections.clear();
        Ok(())
    }

    /// Projects link `l` onto the rx beam of its user's serving link and the
    /// tx beam of serving link `tx_link`.
    fn ensure_projection(&mut self, l: usize, tx_link: usize) -> Result<(), SimError> {
        if self.projections.contains_key(&(l, tx_link)) {
            return Ok(());
        }
        let u = self.links[l].user;
        let serving = self.link_index(self.users[u].serving, u);
        let rx = self.links[serving].beam.as_ref().expect("serving link has a beam");
        let tx = self.links[tx_link].beam.as_ref().expect("serving link has a beam");
        let pair = BeamformingPair {
            tx_weights: tx.tx_weights.clone(),
            rx_weights: rx.rx_weights.clone(),
        };
        let p = ProjectedChannel::new(&self.links[l].realization.spatial, &pair)?;
        self.projections.insert((l, tx_link), p);
        Ok(())
    }

    /// Beamformed gain of link `l` per sub-band at time `t`.
    fn subband_gains(&mut self, l: usize, tx_link: usize, t: f64) -> Result<Vec<f64>, SimError> {
        self.ensure_projection(l, tx_link)?;
        let fd = self.doppler(self.links[l].user);
        let proj = &self.projections[&(l, tx_link)];
        let spatial = &self.links[l].realization.spatial;
        let frame = &self.sc.frame;
        Ok((0..frame.num_subbands())
            .map(|i| proj.gain(&spatial.subpath_gains(t, frame.subband_offset(i), fd)))
            .collect())
    }

    fn link_pathloss_db(&self, l: usize, t: f64) -> Result<f64, SimError> {
        let link = &self.links[l];
        match pathloss_params(self.sc, link.realization.link_state) {
            None => Ok(f64::INFINITY),
            Some(p) => Ok(pathloss_db(
                self.distance_at(link.bs, link.user, t),
                p,
                link.realization.shadowing_db,
            )?),
        }
    }

    pub fn run(mut self) -> Result<RunOutput, SimError> {
        let tti = self.sc.frame.tti_ns();
        let spf = self.sc.frame.slots_per_subframe() as u64;
        let sfpf = self.sc.frame.subframes_per_frame() as u64;
        let end = self.out.duration_ns;
        let n_slots = end / tti;
        let mut q = EventQueue::new();
        if n_slots > 0 {
            q.schedule(0, EventKind::FrameStart { frame: 0 })?;
            q.schedule(0, EventKind::SubframeStart { subframe: 0 })?;
            q.schedule(0, EventKind::SlotStart { global_slot: 0 })?;
        }
        let period_ns = (self.sc.channel.update_period * 1e9).round() as u64;
        for k in 1..=end / period_ns {
            q.schedule(k * period_ns, EventKind::LargeScaleUpdate { index: k })?;
        }
        let arrival_ns = match self.sc.run.traffic {
            Traffic::Cbr { rate_bps, packet_bits } => {
                let gap = ((packet_bits as f64 / rate_bps) * 1e9).round().max(1.0) as u64;
                for u in 0..self.users.len() {
                    q.schedule(0, EventKind::TrafficArrival { user: u as u32 })?;
                }
                Some((gap, packet_bits))
            }
            Traffic::FullBuffer { .. } => None,
        };

        while let Some(ev) = q.pop() {
            let now = ev.time_ns;
            match ev.kind {
                EventKind::FrameStart { .. } => self.out.counts.frames += 1,
                EventKind::SubframeStart { .. } => {
                    self.out.counts.subframes += 1;
                    if !self.has_uplink_control() {
                        self.deliver_cqi(now)?;
                    }
                }
                EventKind::SlotStart { global_slot } => {
                    self.out.counts.slots += 1;
                    self.on_slot(global_slot, now)?;
                    let next = global_slot + 1;
                    if next < n_slots {
                        let t = next * tti;
                        if next % spf == 0 {
                            if (next / spf) % sfpf == 0 {
                                q.schedule(t, EventKind::FrameStart { frame: next / spf / sfpf })?;
                            }
                            q.schedule(t, EventKind::SubframeStart { subframe: next / spf })?;
                        }
                        q.schedule(t, EventKind::SlotStart { global_slot: next })?;
                    }
                }
                EventKind::LargeScaleUpdate { .. } => {
                    self.out.counts.large_scale_updates += 1;
                    self.on_large_scale_update(now)?;
                }
                EventKind::TrafficArrival { user } => {
                    self.out.counts.traffic_arrivals += 1;
                    if let Some((gap, bits)) = arrival_ns {
                        self.users[user as usize].queue.push(bits);
                        if now + gap < end {
                            q.schedule(now + gap, EventKind::TrafficArrival { user })?;
                        }
                    }
                }
            }
        }
        Ok(self.out)
    }

    fn has_uplink_control(&self) -> bool {
        self.layout
            .iter()
            .any(|s| s.kind == SlotKind::Control && s.direction == Direction::Uplink)
    }

    fn deliver_cqi(&mut self, now: u64) -> Result<(), SimError> {
        for u in 0..self.users.len() {
            if let Some(report) = self.users[u].pending_cqi.take() {
                let bs = self.users[u].serving;
                self.schedulers[bs].relay_cqi(report)?;
                self.out.sap_log.push(SapRecord {
                    time_ns: now,
                    bs,
                    message: SapMessage::CqiReport(report),
                });
            }
        }
        Ok(())
    }

    fn on_large_scale_update(&mut self, now: u64) -> Result<(), SimError> {
        let t = now as f64 * 1e-9;
        let period = self.sc.channel.update_period;
        for l in 0..self.links.len() {
            let replaced = update_large_scale(
                &mut self.links[l].realization,
                t,
                period,
                &self.pool,
                &mut self.rng_large,
            )?;
            if replaced && self.sc.run.link_state.pinned().is_none() {
                let d = self.distance_at(self.links[l].bs, self.links[l].user, t);
                let (state, shadow) = self.draw_large_scale(d)?;
                self.links[l].realization.link_state = state;
                self.links[l].realization.shadowing_db = shadow;
            }
        }
        self.refresh_beams(t)?;
        if self.sc.run.channel_grid {
            self.write_grid(now, GridEvent::LargeScaleUpdate)?;
        }
        Ok(())
    }

    fn write_grid(&mut self, now: u64, event: GridEvent) -> Result<(), SimError> {
        let t = now as f64 * 1e-9;
        for u in 0..self.users.len() {
            let bs = self.users[u].serving;
            let l = self.link_index(bs, u);
            let gains = self.subband_gains(l, l, t)?;
            let realization = self.links[l].realization.epoch;
            for (i, g) in gains.into_iter().enumerate() {
                self.out.channel_grid.push(GridRow {
                    time_ns: now,
                    event,
                    link: l,
                    bs,
                    user: u as u32,
                    realization,
                    subband: i,
                    freq_offset_hz: self.sc.frame.subband_offset(i),
                    gain_db: linear_to_db(g),
                });
            }
        }
        Ok(())
    }

    fn on_slot(&mut self, global_slot: u64, now: u64) -> Result<(), SimError> {
        let spf = self.sc.frame.slots_per_subframe() as u64;
        let sfpf = self.sc.frame.subframes_per_frame() as u64;
        let subframe = global_slot / spf;
        let frame = subframe / sfpf;
        let slot = (global_slot % spf) as usize;
        let latency = self.sc.frame.l1l2_control_latency();

        for bs in 0..self.schedulers.len() {
            let ind = SapMessage::SubframeIndication {
                frame,
                subframe,
                slot: slot as u32 + 1,
            };
            self.out.sap_log.push(SapRecord { time_ns: now, bs, message: ind });
            if let Some(trigger) = on_subframe_indication(slot as u32 + 1, subframe, latency) {
                let SapMessage::SchedTriggerReq { target_subframe } = trigger else {
                    unreachable!("slot-1 indication yields a trigger request")
                };
                self.out.sap_log.push(SapRecord { time_ns: now, bs, message: trigger });
                let map = self.schedulers[bs].schedule(target_subframe, &self.sc.frame).clone();
                self.out.sap_log.push(SapRecord {
                    time_ns: now,
                    bs,
                    message: SapMessage::SchedConfigInd(map.clone()),
                });
                self.out.sap_log.push(SapRecord {
                    time_ns: now,
                    bs,
                    message: SapMessage::ResourceAllocation(map),
                });
            }
            if slot == 0 {
                self.current[bs] = self.schedulers[bs].take(subframe);
            }
        }

        if self.sc.run.channel_grid {
            self.write_grid(now, GridEvent::Slot)?;
        }

        let layout = self.layout[slot];
        match (layout.kind, layout.direction) {
            (SlotKind::Control, Direction::Uplink) => self.deliver_cqi(now)?,
            (SlotKind::Data, Direction::Downlink) => self.downlink_slot(global_slot, now)?,
            _ => {}
        }
        Ok(())
    }

    fn downlink_slot(&mut self, global_slot: u64, now: u64) -> Result<(), SimError> {
        let t = now as f64 * 1e-9;
        let spf = self.sc.frame.slots_per_subframe() as u64;
        let sfpf = self.sc.frame.subframes_per_frame() as u64;
        let subframe = global_slot / spf;
        let slot = (global_slot % spf) as usize;

        // MAC: who sends what
        let mut txs = Vec::new();
        let mut idle = Vec::new();
        for bs in 0..self.current.len() {
            let a = self.current[bs].assignments[slot];
            let Some(user) = a.user else { continue };
            let user = user as usize;
            let queue = &mut self.users[user].queue;
            if let Traffic::FullBuffer { packet_bits } = self.sc.run.traffic {
                while queue.occupancy_bits() < a.tb_size as u64 {
                    queue.push(packet_bits);
                }
            }
            let burst = dequeue_for_slot(queue, a.tb_size);
            match a.mcs {
                Some(mcs) if !burst.is_empty() => txs.push(Tx {
                    bs,
                    user,
                    mcs,
                    tb_size: a.tb_size,
                    cqi: a.cqi,
                }),
                _ => idle.push((bs, user, a.mcs, a.tb_size)),
            }
        }

        let n_sb = self.sc.frame.num_subbands();
        let p_sb = crate::phy::dbm_to_watts(self.sc.radio.tx_power_dbm) / n_sb as f64;
        let n0 = thermal_noise_psd::<f64>();
        let bw = self.sc.frame.subband_width();
        let nf = self.sc.radio.noise_figure_db;

        for u in 0..self.users.len() {
            let serving = self.users[u].serving;
            let l = self.link_index(serving, u);
            let gains = self.subband_gains(l, l, t)?;
            let pl = self.link_pathloss_db(l, t)?;
            let pl_lin = pathloss_linear(pl);
            let mut interference: Vec<(f64, Vec<f64>)> = Vec::new();
            for tx in txs.iter().filter(|x| x.bs != serving) {
                let m = self.link_index(tx.bs, u);
                let tx_link = self.link_index(tx.bs, tx.user);
                interference.push((pathloss_linear(self.link_pathloss_db(m, t)?), self.subband_gains(m, tx_link, t)?));
            }
            let sinr: Vec<f64> = (0..n_sb)
                .map(|i| {
                    let s = LinkPower { tx_power_w: p_sb, pathloss: pl_lin, gain: gains[i] };
                    let interferers: Vec<LinkPower> = interference
                        .iter()
                        .map(|(pl_j, g_j)| LinkPower { tx_power_w: p_sb, pathloss: *pl_j, gain: g_j[i] })
                        .collect();
                    compute_sinr(&s, &interferers, bw, n0, nf)
                })
                .collect();
            let wideband = sinr.iter().sum::<f64>() / n_sb as f64;
            let amc = &self.amc;
            let cqi = subband_cqi(&sinr, &self.cqi_table, &self.miesm, |c| amc.cqi_to_mcs(c))?;
            self.users[u].pending_cqi = Some(CqiReport {
                user: self.users[u].id,
                cqi,
                subframe,
                slot: slot as u32,
            });

            let served = txs.iter().find(|x| x.bs == serving && x.user == u);
            let idle_here = idle.iter().find(|x| x.0 == serving && x.1 == u);
            if served.is_none() && idle_here.is_none() {
                continue;
            }
            let (mcs, tb_size, tb_bler, outcome) = match served {
                Some(tx) => {
                    let mmib = mean_mmib(&sinr, tx.mcs, &self.miesm)?;
                    let bler = if self.sc.radio.error_model {
                        TransportBlock::segment(tx.tb_size, tx.mcs, mmib, self.sc.radio.max_cb_size)?
                            .bler(&self.miesm)?
                    } else {
                        0.0
                    };
                    let draw: f64 = self.rng_decode.random();
                    let outcome = match decide_decode(bler, draw) {
                        DecodeOutcome::Decoded => SlotOutcome::Decoded,
                        DecodeOutcome::Dropped => SlotOutcome::Dropped,
                    };
                    debug_assert!(tx.cqi >= 1);
                    (Some(tx.mcs), tx.tb_size, bler, outcome)
                }
                None => {
                    let (_, _, mcs, tb) = *idle_here.expect("checked above");
                    (mcs, tb, 0.0, SlotOutcome::Idle)
                }
            };
            let mean_gain = gains.iter().sum::<f64>() / n_sb as f64;
            let link = &self.links[l];
            self.out.slot_traces.push(SlotTrace {
                time_ns: now,
                frame: subframe / sfpf,
                subframe: (subframe % sfpf) as u32,
                slot: slot as u32,
                link: l,
                bs: serving,
                user: u as u32,
                direction: Direction::Downlink,
                kind: SlotKind::Data,
                distance_m: self.distance_at(serving, u, t),
                link_state: link.realization.link_state,
                pathloss_db: pl,
                bf_gain_db: linear_to_db(mean_gain),
                subband_sinr_db: sinr.iter().map(|&s| linear_to_db(s)).collect(),
                wideband_sinr_db: linear_to_db(wideband),
                cqi,
                mcs,
                tb_size_bits: tb_size,
                tb_bler,
                outcome,
                delivered_bits: if outcome == SlotOutcome::Decoded { tb_size } else { 0 },
                realization: link.realization.epoch,
            });
        }
        Ok(())
    }
}
