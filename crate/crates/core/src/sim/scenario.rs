//! Scenario parameters: channel, radio, topology and run control.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::mobility::{time_to_reach, MobilityState};
use crate::channel::{ClusterStats, LinkState, LinkStateModel, PathlossParams, PowerIteration};
use crate::config::FrameConfig;
use crate::phy::CRC_BITS;

/// Default run length when neither a duration nor a range is given, metres.
pub const DEFAULT_MAX_DISTANCE: f64 = 200.0;

/// Packet size of the default traffic source, bits.
pub const DEFAULT_PACKET_BITS: u32 = 12_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub los: PathlossParams,
    pub nlos: PathlossParams,
    pub link_state_model: LinkStateModel,
    /// Seconds between spatial-signature refreshes.
    pub update_period: f64,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    /// Realizations generated when no pool file is given.
    pub pool_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pool_file: Option<PathBuf>,
    pub cluster: ClusterStats,
    pub beamforming: PowerIteration,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            los: PathlossParams::los(),
            nlos: PathlossParams::nlos(),
            link_state_model: LinkStateModel::default(),
            update_period: 0.1,
            tx_antennas: 64,
            rx_antennas: 16,
            pool_size: 100,
            pool_file: None,
            cluster: ClusterStats::default(),
            beamforming: PowerIteration::default(),
        }
    }
}

fn default_bler_target() -> f64 {
    0.1
}
fn default_max_cb() -> u32 {
    6144
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    /// BLER the CQI thresholds are derived against.
    #[serde(default = "default_bler_target")]
    pub bler_target: f64,
    #[serde(default = "default_max_cb")]
    pub max_cb_size: u32,
    /// When off, every transmitted TB decodes.
    #[serde(default = "yes")]
    pub error_model: bool,
}

impl RadioSection {
    pub fn new(tx_power_dbm: f64, noise_figure_db: f64) -> Self {
        Self {
            tx_power_dbm,
            noise_figure_db,
            bler_target: default_bler_target(),
            max_cb_size: default_max_cb(),
            error_model: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseStationSpec {
    pub position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSpec {
    pub position: [f64; 2],
    #[serde(default)]
    pub velocity: [f64; 2],
}

impl UserSpec {
    pub fn mobility(&self) -> MobilityState {
        MobilityState {
            position: self.position,
            velocity: self.velocity,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub base_stations: Vec<BaseStationSpec>,
    #[serde(default)]
    pub users: Vec<UserSpec>,
}

impl TopologySection {
    /// Index of the base station nearest to `user` at t = 0; ties go to the
    /// lower index.
    pub fn serving_bs(&self, user: &UserSpec) -> Option<usize> {
        let d = |b: &BaseStationSpec| super::mobility::distance(b.position, user.position);
        (0..self.base_stations.len()).min_by(|&a, &b| {
            d(&self.base_stations[a])
                .partial_cmp(&d(&self.base_stations[b]))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkStateMode {
    Los,
    Nlos,
    /// Drawn from the link-state model at every (re)selection.
    #[default]
    Random,
}

impl LinkStateMode {
    pub fn pinned(self) -> Option<LinkState> {
        match self {
            LinkStateMode::Los => Some(LinkState::Los),
            LinkStateMode::Nlos => Some(LinkState::Nlos),
            LinkStateMode::Random => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Traffic {
    /// Downlink queues are never empty.
    FullBuffer { packet_bits: u32 },
    /// One packet of `packet_bits` every `packet_bits / rate_bps` seconds per user.
    Cbr { rate_bps: f64, packet_bits: u32 },
}

impl Default for Traffic {
    fn default() -> Self {
        Traffic::FullBuffer {
            packet_bits: DEFAULT_PACKET_BITS,
        }
    }
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Run until every user is this far from its base station, metres.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_distance: Option<f64>,
    #[serde(default)]
    pub link_state: LinkStateMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Export per-sub-band beamformed gains of every serving link.
    #[serde(default)]
    pub channel_grid: bool,
    #[serde(default)]
    pub traffic: Traffic,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            duration: None,
            max_distance: None,
            link_state: LinkStateMode::Random,
            output: None,
            channel_grid: false,
            traffic: Traffic::default(),
        }
    }
}

/// A validation failure tied to a dotted parameter path.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{key}: {message}")]
pub struct ScenarioError {
    pub key: String,
    pub message: String,
}

impl ScenarioError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

/// Everything a run needs, validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub frame: FrameConfig,
    pub channel: ChannelSection,
    pub radio: RadioSection,
    pub topology: TopologySection,
    pub run: RunSection,
}

fn finite_positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl Scenario {
    pub fn new(
        frame: FrameConfig,
        channel: ChannelSection,
        radio: RadioSection,
        topology: TopologySection,
        run: RunSection,
    ) -> Result<Self, Vec<ScenarioError>> {
        let s = Self {
            frame,
            channel,
            radio,
            topology,
            run,
        };
        let errors = s.validate();
        if errors.is_empty() {
            Ok(s)
        } else {
            Err(errors)
        }
    }

    /// Single base station at the origin and one user, defaults elsewhere.
    pub fn single_link(user: UserSpec, radio: RadioSection, run: RunSection) -> Result<Self, Vec<ScenarioError>> {
        Self::new(
            FrameConfig::default(),
            ChannelSection::default(),
            radio,
            TopologySection {
                base_stations: vec![BaseStationSpec { position: [0.0, 0.0] }],
                users: vec![user],
            },
            run,
        )
    }

    pub fn validate(&self) -> Vec<ScenarioError> {
        let mut e = Vec::new();
        let mut check = |ok: bool, key: &str, msg: &str| {
            if !ok {
                e.push(ScenarioError::new(key, msg));
            }
        };
        let c = &self.channel;
        check(finite_positive(c.update_period), "channel.update_period", "must be finite and > 0");
        check(c.tx_antennas >= 1, "channel.tx_antennas", "must be >= 1");
        check(c.rx_antennas >= 1, "channel.rx_antennas", "must be >= 1");
        check(c.pool_size >= 1, "channel.pool_size", "must be >= 1");
        check(c.los.validate().is_ok(), "channel.los", "needs beta > 0, sigma >= 0 and finite alpha");
        check(c.nlos.validate().is_ok(), "channel.nlos", "needs beta > 0, sigma >= 0 and finite alpha");
        check(c.beamforming.iterations >= 1, "channel.beamforming.iterations", "must be >= 1");
        check(
            c.beamforming.tolerance >= 0.0 && c.beamforming.tolerance.is_finite(),
            "channel.beamforming.tolerance",
            "must be finite and >= 0",
        );
        if let Err(m) = c.link_state_model.validate() {
            check(false, "channel.link_state_model", &m);
        }
        if let Err(m) = c.cluster.validate() {
            check(false, "channel.cluster", &m);
        }

        let r = &self.radio;
        check(r.tx_power_dbm.is_finite(), "radio.tx_power_dbm", "must be finite");
        check(
            r.noise_figure_db.is_finite() && r.noise_figure_db >= 0.0,
            "radio.noise_figure_db",
            "must be finite and >= 0",
        );
        check(
            r.bler_target > 0.0 && r.bler_target < 1.0,
            "radio.bler_target",
            "must lie strictly between 0 and 1",
        );
        check(r.max_cb_size > CRC_BITS, "radio.max_cb_size", "must exceed the 24-bit CRC");

        let t = &self.topology;
        check(!t.base_stations.is_empty(), "topology.base_stations", "at least one base station is required");
        for (i, b) in t.base_stations.iter().enumerate() {
            check(
                b.position.iter().all(|x| x.is_finite()),
                &format!("topology.base_stations[{i}].position"),
                "must be finite",
            );
        }
        for (i, u) in t.users.iter().enumerate() {
            check(
                u.position.iter().all(|x| x.is_finite()),
                &format!("topology.users[{i}].position"),
                "must be finite",
            );
            check(
                u.velocity.iter().all(|x| x.is_finite()),
                &format!("topology.users[{i}].velocity"),
                "must be finite",
            );
        }

        let run = &self.run;
        if let Some(d) = run.duration {
            check(finite_positive(d), "run.duration", "must be finite and > 0");
        }
        if let Some(d) = run.max_distance {
            check(finite_positive(d), "run.max_distance", "must be finite and > 0");
        }
        check(
            run.duration.is_none() || run.max_distance.is_none(),
            "run.duration",
            "set either duration or max_distance, not both",
        );
        match run.traffic {
            Traffic::FullBuffer { packet_bits } => {
                check(packet_bits >= 1, "run.traffic.packet_bits", "must be >= 1")
            }
            Traffic::Cbr { rate_bps, packet_bits } => {
                check(packet_bits >= 1, "run.traffic.packet_bits", "must be >= 1");
                check(finite_positive(rate_bps), "run.traffic.rate_bps", "must be finite and > 0");
            }
        }
        if e.is_empty() && run.duration.is_none() && self.resolve_duration().is_none() {
            e.push(ScenarioError::new(
                "run.max_distance",
                "some user never reaches the range; set run.duration",
            ));
        }
        e
    }

    /// Run length in seconds: the explicit duration, or the time for the
    /// last user to reach `max_distance` from its base station.
    pub fn resolve_duration(&self) -> Option<f64> {
        if let Some(d) = self.run.duration {
            return Some(d);
        }
        let range = self.run.max_distance.unwrap_or(DEFAULT_MAX_DISTANCE);
        let mut longest: Option<f64> = None;
        for u in &self.topology.users {
            let bs = self.topology.serving_bs(u)?;
            let t = time_to_reach(&u.mobility(), self.topology.base_stations[bs].position, range)?;
            longest = Some(longest.map_or(t, |l: f64| l.max(t)));
        }
        longest
    }

    pub fn duration_ns(&self) -> Option<u64> {
        self.resolve_duration().map(|d| (d * 1e9).round() as u64)
    }
}
