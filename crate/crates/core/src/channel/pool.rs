//! Realization pool generation and per-link large-scale evolution.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use super::fading::{ula_signature, SpatialChannel, Subpath};
use super::linalg::CMatrix;
use super::state::LinkState;
use super::ChannelError;
use crate::scalar::Real;

/// Half a nanosecond: comparisons against the update period are made at the
/// simulator's clock resolution.
const CLOCK_EPS: f64 = 0.5e-9;

/// Environment statistics driving realization generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterStats {
    /// Cluster count is uniform in `1..=max_clusters`.
    pub max_clusters: usize,
    /// Subpaths per cluster are uniform in `1..=max_subpaths`.
    pub max_subpaths: usize,
    /// Mean excess delay of a cluster, seconds.
    pub cluster_delay_spread: f64,
    /// Mean excess delay of a subpath within its cluster, seconds.
    pub subpath_delay_spread: f64,
    /// RMS angular spread of subpaths around the cluster centre, degrees.
    pub angular_spread_deg: f64,
    /// Delay-power proportionality factor of cluster powers.
    pub power_decay: f64,
    /// Log-normal per-cluster power deviation, dB.
    pub cluster_shadow_db: f64,
}

impl Default for ClusterStats {
    fn default() -> Self {
        Self {
            max_clusters: 4,
            max_subpaths: 10,
            cluster_delay_spread: 30e-9,
            subpath_delay_spread: 2e-9,
            angular_spread_deg: 10.0,
            power_decay: 2.8,
            cluster_shadow_db: 4.0,
        }
    }
}

impl ClusterStats {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_clusters == 0 || self.max_subpaths == 0 {
            return Err("max_clusters and max_subpaths must be >= 1".into());
        }
        let nonneg = [
            self.cluster_delay_spread,
            self.subpath_delay_spread,
            self.angular_spread_deg,
            self.cluster_shadow_db,
        ];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err("spreads must be finite and >= 0".into());
        }
        if !(self.power_decay.is_finite() && self.power_decay >= 1.0) {
            return Err("power_decay must be >= 1".into());
        }
        Ok(())
    }
}

/// Immutable set of spatial channel realizations shared by all links.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationPool<T: Real = f64> {
    entries: Vec<SpatialChannel<T>>,
}

impl<T: Real> RealizationPool<T> {
    pub fn new(entries: Vec<SpatialChannel<T>>) -> Result<Self, ChannelError> {
        if entries.is_empty() {
            return Err(ChannelError::EmptyPool);
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&SpatialChannel<T>> {
        self.entries.get(i)
    }

    pub fn entries(&self) -> &[SpatialChannel<T>] {
        &self.entries
    }

    /// Uniformly draws an entry index.
    pub fn draw_index(&self, rng: &mut impl Rng) -> usize {
        rng.random_range(0..self.entries.len())
    }
}

fn generate_one<T: Real>(rng: &mut ChaCha8Rng, stats: &ClusterStats, tx: usize, rx: usize) -> SpatialChannel<T> {
    let k = rng.random_range(1..=stats.max_clusters);
    let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=stats.max_subpaths)).collect();

    let cluster_delay = Exp::new(1.0 / stats.cluster_delay_spread.max(1e-15)).expect("positive rate");
    let subpath_delay = Exp::new(1.0 / stats.subpath_delay_spread.max(1e-15)).expect("positive rate");
    let shadow = Normal::new(0.0, stats.cluster_shadow_db).expect("finite deviation");
    let spread = Normal::new(0.0, stats.angular_spread_deg.to_radians()).expect("finite deviation");

    let mut delays: Vec<f64> = (0..k).map(|_| cluster_delay.sample(rng)).collect();
    let first = delays.iter().cloned().fold(f64::INFINITY, f64::min);
    delays.iter_mut().for_each(|d| *d -= first);

    // cluster power ∝ U^(r-1)·10^(-Z/10)
    let mut cluster_power: Vec<f64> = (0..k)
        .map(|_| {
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            u.powf(stats.power_decay - 1.0) * 10f64.powf(-shadow.sample(rng) / 10.0)
        })
        .collect();
    let total: f64 = cluster_power.iter().sum();
    cluster_power.iter_mut().for_each(|p| *p /= total);

    let n: usize = sizes.iter().sum();
    let mut subpaths = Vec::with_capacity(n);
    let mut tx_cols = Vec::with_capacity(n);
    let mut rx_cols = Vec::with_capacity(n);
    for (c, &l) in sizes.iter().enumerate() {
        let aod: f64 = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
        let aoa: f64 = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
        for _ in 0..l {
            subpaths.push(Subpath {
                power: T::lit(cluster_power[c] / l as f64),
                aoa_rel_motion: T::lit(rng.random_range(0.0..2.0 * PI)),
                delay: T::lit(delays[c] + subpath_delay.sample(rng)),
            });
            tx_cols.push(ula_signature::<T>(tx, T::lit(aod + spread.sample(rng))));
            rx_cols.push(ula_signature::<T>(rx, T::lit(aoa + spread.sample(rng))));
        }
    }
    let tx_m = CMatrix::from_fn(tx, n, |r, j| tx_cols[j][r]);
    let rx_m = CMatrix::from_fn(rx, n, |r, j| rx_cols[j][r]);
    SpatialChannel::new(tx_m, rx_m, subpaths, sizes).expect("generated realization is consistent")
}

/// Deterministically generates `count` realizations from `seed`.
pub fn generate_realization_pool<T: Real>(
    seed: u64,
    count: usize,
    stats: &ClusterStats,
    tx_antennas: usize,
    rx_antennas: usize,
) -> Result<RealizationPool<T>, ChannelError> {
    if tx_antennas == 0 || rx_antennas == 0 {
        return Err(ChannelError::ZeroAntennas);
    }
    if count == 0 {
        return Err(ChannelError::EmptyPool);
    }
    stats.validate().map_err(ChannelError::InvalidStats)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..count)
        .map(|_| generate_one(&mut rng, stats, tx_antennas, rx_antennas))
        .collect();
    RealizationPool::new(entries)
}

/// The channel currently attached to one link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T: Real = f64> {
    pub link_state: LinkState,
    pub shadowing_db: T,
    pub spatial: SpatialChannel<T>,
    /// Index of the pool entry `spatial` was copied from.
    pub pool_index: usize,
    /// Incremented on every large-scale replacement.
    pub epoch: u64,
    pub last_large_scale_update: T,
}

impl<T: Real> ChannelRealization<T> {
    /// Attaches a uniformly drawn pool entry.
    pub fn draw(
        pool: &RealizationPool<T>,
        link_state: LinkState,
        shadowing_db: T,
        now: T,
        rng: &mut impl Rng,
    ) -> Self {
        let pool_index = pool.draw_index(rng);
        Self {
            link_state,
            shadowing_db,
            spatial: pool.entries[pool_index].clone(),
            pool_index,
            epoch: 0,
            last_large_scale_update: now,
        }
    }
}

/// Replaces the spatial part of `realization` when a full update period has
/// elapsed. Returns whether a replacement happened.
pub fn update_large_scale<T: Real>(
    realization: &mut ChannelRealization<T>,
    now: T,
    update_period: T,
    pool: &RealizationPool<T>,
    rng: &mut impl Rng,
) -> Result<bool, ChannelError> {
    if pool.is_empty() {
        return Err(ChannelError::EmptyPool);
    }
    if now - realization.last_large_scale_update + T::lit(CLOCK_EPS) < update_period {
        return Ok(false);
    }
    let i = pool.draw_index(rng);
    realization.spatial = pool.entries[i].clone();
    realization.pool_index = i;
    realization.epoch += 1;
    realization.last_large_scale_update = now;
    Ok(true)
}
