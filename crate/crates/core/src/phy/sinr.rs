//! Received power and interference-aware SINR.

use crate::scalar::{linear_to_db, Real};

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Reference noise temperature, K.
pub const NOISE_TEMPERATURE: f64 = 290.0;

/// Thermal noise power spectral density `k·T`, W/Hz.
pub fn thermal_noise_psd<T: Real>() -> T {
    T::lit(BOLTZMANN * NOISE_TEMPERATURE)
}

/// `P_TX + 10·log10(G_BF) − PL − SW`, dBm. Infinite pathloss (outage) or a
/// zero gain give negative infinity.
pub fn rx_power_dbm<T: Real>(tx_power_dbm: T, beamforming_gain: T, pathloss_db: T, shadowing_db: T) -> T {
    if pathloss_db == T::infinity() || beamforming_gain <= T::zero() {
        return T::neg_infinity();
    }
    tx_power_dbm + linear_to_db(beamforming_gain) - pathloss_db - shadowing_db
}

pub fn dbm_to_watts<T: Real>(dbm: T) -> T {
    T::lit(10.0).powf((dbm - T::lit(30.0)) / T::lit(10.0))
}

/// Power terms of one transmitter as seen by the receiver, linear units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPower<T: Real = f64> {
    pub tx_power_w: T,
    /// Linear pathloss including shadowing; `+∞` for an outage link.
    pub pathloss: T,
    /// Beamforming gain `|w_rxᴴ H w_tx|²` for the pair of beams in use.
    pub gain: T,
}

impl<T: Real> LinkPower<T> {
    /// Builds the linear terms from dBm / dB quantities.
    pub fn from_db(tx_power_dbm: T, pathloss_db: T, gain: T) -> Self {
        Self {
            tx_power_w: dbm_to_watts(tx_power_dbm),
            pathloss: if pathloss_db == T::infinity() {
                T::infinity()
            } else {
                T::lit(10.0).powf(pathloss_db / T::lit(10.0))
            },
            gain,
        }
    }

    /// `(P_tx / PL)·G`; zero for an outage link.
    pub fn received(&self) -> T {
        if self.pathloss == T::infinity() {
            T::zero()
        } else {
            self.tx_power_w / self.pathloss * self.gain
        }
    }
}

/// Noise power `BW·N₀·NF` in watts.
pub fn noise_power<T: Real>(bandwidth: T, noise_psd: T, noise_figure_db: T) -> T {
    bandwidth * noise_psd * T::lit(10.0).powf(noise_figure_db / T::lit(10.0))
}

/// `S / (Σ I_j + BW·N₀·NF)` in linear units. Zero signal gives zero.
pub fn compute_sinr<T: Real>(
    serving: &LinkPower<T>,
    interferers: &[LinkPower<T>],
    bandwidth: T,
    noise_psd: T,
    noise_figure_db: T,
) -> T {
    let signal = serving.received();
    if signal <= T::zero() {
        return T::zero();
    }
    let interference: T = interferers.iter().map(LinkPower::received).sum();
    signal / (interference + noise_power(bandwidth, noise_psd, noise_figure_db))
}

/// Per-sub-band and wideband SINR of one reception.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrRecord<T: Real = f64> {
    pub link: usize,
    pub slot: u64,
    pub subband: Vec<T>,
    /// Arithmetic mean of the linear sub-band values.
    pub wideband: T,
}

impl<T: Real> SinrRecord<T> {
    pub fn from_subbands(link: usize, slot: u64, subband: Vec<T>) -> Self {
        let wideband = if subband.is_empty() {
            T::zero()
        } else {
            subband.iter().copied().sum::<T>() / T::from_count(subband.len())
        };
        Self {
            link,
            slot,
            subband,
            wideband,
        }
    }
}
