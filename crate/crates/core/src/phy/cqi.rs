//! Wideband SINR to CQI quantisation.

use super::miesm::{effective_sinr, MiesmTable};
use super::PhyError;
use crate::scalar::Real;

/// Highest CQI index.
pub const MAX_CQI: u8 = 15;

/// Linear SINR thresholds for CQI 1..=15; CQI 0 is below the first one.
#[derive(Debug, Clone, PartialEq)]
pub struct CqiTable {
    thresholds: [f64; MAX_CQI as usize],
}

impl CqiTable {
    pub fn new(thresholds: [f64; MAX_CQI as usize]) -> Result<Self, PhyError> {
        if thresholds.iter().any(|t| t.is_nan() || *t < 0.0) || thresholds.windows(2).any(|w| w[1] < w[0]) {
            return Err(PhyError::InvalidCqiThresholds);
        }
        Ok(Self { thresholds })
    }

    pub fn from_db(thresholds_db: [f64; MAX_CQI as usize]) -> Result<Self, PhyError> {
        Self::new(thresholds_db.map(|d| 10f64.powf(d / 10.0)))
    }

    /// Linear threshold of `cqi` (1..=15).
    pub fn threshold(&self, cqi: u8) -> Option<f64> {
        (1..=MAX_CQI).contains(&cqi).then(|| self.thresholds[cqi as usize - 1])
    }

    pub fn thresholds(&self) -> &[f64; MAX_CQI as usize] {
        &self.thresholds
    }
}

/// Highest CQI whose threshold does not exceed the SINR; a SINR exactly on a
/// threshold maps to that (higher) index.
pub fn sinr_to_cqi<T: Real>(wideband_sinr: T, table: &CqiTable) -> u8 {
    let s = wideband_sinr.as_f64();
    if s.is_nan() {
        return 0;
    }
    table.thresholds.partition_point(|t| *t <= s) as u8
}

/// CQI from per-subband SINRs: the highest index whose MCS, judged on the
/// MIESM effective SINR for that MCS, clears its threshold.
pub fn subband_cqi<T: Real>(
    sinrs: &[T],
    table: &CqiTable,
    miesm: &MiesmTable,
    mcs_of: impl Fn(u8) -> Option<u8>,
) -> Result<u8, PhyError> {
    for cqi in (1..=MAX_CQI).rev() {
        let mcs = mcs_of(cqi).ok_or_else(|| PhyError::MissingEntry(format!("mcs for cqi {cqi}")))?;
        if sinr_to_cqi(effective_sinr(sinrs, mcs, miesm)?, table) >= cqi {
            return Ok(cqi);
        }
    }
    Ok(0)
}
