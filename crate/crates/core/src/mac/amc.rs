//! Adaptive modulation and coding: CQI to MCS, spectral efficiency and
//! transport-block size, plus CQI thresholds derived from a BLER target.

use crate::config::FrameConfig;
use crate::phy::{mean_mmib, CqiTable, MiesmTable, PhyError, TransportBlock, CRC_BITS, MAX_CQI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmcEntry {
    pub cqi: u8,
    pub mcs: u8,
    pub modulation_order: u8,
    /// Code rate × 1024.
    pub code_rate_x1024: u16,
    /// Information bits per modulation symbol.
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmcTable {
    entries: Vec<AmcEntry>,
}

const LTE_LADDER: [(u8, u16, f64); 15] = [
    (2, 78, 0.1523),
    (2, 120, 0.2344),
    (2, 193, 0.3770),
    (2, 308, 0.6016),
    (2, 449, 0.8770),
    (2, 602, 1.1758),
    (4, 378, 1.4766),
    (4, 490, 1.9141),
    (4, 616, 2.4063),
    (6, 466, 2.7305),
    (6, 567, 3.3223),
    (6, 666, 3.9023),
    (6, 772, 4.5234),
    (6, 873, 5.1152),
    (6, 948, 5.5547),
];

impl Default for AmcTable {
    fn default() -> Self {
        Self::lte()
    }
}

impl AmcTable {
    /// Fifteen-level QPSK/16QAM/64QAM ladder; MCS index is `cqi − 1`.
    pub fn lte() -> Self {
        let entries = LTE_LADDER
            .iter()
            .enumerate()
            .map(|(i, &(q, r, e))| AmcEntry {
                cqi: i as u8 + 1,
                mcs: i as u8,
                modulation_order: q,
                code_rate_x1024: r,
                efficiency: e,
            })
            .collect();
        Self { entries }
    }

    /// Entries for CQI 1..=15 in order; efficiency must not decrease.
    pub fn from_entries(entries: Vec<AmcEntry>) -> Result<Self, String> {
        if entries.len() != MAX_CQI as usize {
            return Err(format!("expected {MAX_CQI} entries, found {}", entries.len()));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.cqi as usize != i + 1 {
                return Err(format!("entry {i} has cqi {}, expected {}", e.cqi, i + 1));
            }
            if !(e.efficiency >= 0.0 && e.efficiency.is_finite()) {
                return Err(format!("cqi {}: efficiency must be finite and >= 0", e.cqi));
            }
        }
        if entries.windows(2).any(|w| w[1].efficiency < w[0].efficiency) {
            return Err("spectral efficiency must be nondecreasing in CQI".into());
        }
        Ok(Self { entries })
    }

    pub fn entry(&self, cqi: u8) -> Option<&AmcEntry> {
        (cqi >= 1).then(|| self.entries.get(cqi as usize - 1)).flatten()
    }

    pub fn entries(&self) -> &[AmcEntry] {
        &self.entries
    }

    pub fn cqi_to_mcs(&self, cqi: u8) -> Option<u8> {
        self.entry(cqi).map(|e| e.mcs)
    }

    pub fn efficiency(&self, cqi: u8) -> f64 {
        self.entry(cqi).map_or(0.0, |e| e.efficiency)
    }
}

/// TB size in a slot with `data_symbols` data-bearing symbols.
pub fn tb_size_for_symbols(cqi: u8, amc: &AmcTable, cfg: &FrameConfig, data_symbols: u32) -> u32 {
    let eff = amc.efficiency(cqi);
    if eff <= 0.0 {
        return 0;
    }
    let subcarriers =
        cfg.subcarriers_per_subband() as f64 * cfg.subbands_per_rb() as f64 * cfg.num_resource_blocks() as f64;
    let raw = (eff * data_symbols as f64 * subcarriers).floor() - CRC_BITS as f64;
    raw.max(0.0) as u32
}

/// `⌊eff(cqi)·(symbols − reference symbols)·subcarriers·subbands/RB·RBs⌋ − CRC`, floored at 0.
pub fn cqi_to_tb_size(cqi: u8, amc: &AmcTable, cfg: &FrameConfig) -> u32 {
    tb_size_for_symbols(cqi, amc, cfg, cfg.data_symbols(false))
}

/// Every TB size a data slot can carry: all CQIs, with and without a guard.
pub fn tb_size_ladder(amc: &AmcTable, cfg: &FrameConfig) -> Vec<u32> {
    let mut v: Vec<u32> = (0..=MAX_CQI)
        .flat_map(|c| {
            [false, true]
                .into_iter()
                .map(move |sw| tb_size_for_symbols(c, amc, cfg, cfg.data_symbols(sw)))
        })
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// TB BLER at a flat linear SINR for the given MCS and TB size.
pub fn flat_sinr_bler(sinr: f64, mcs: u8, tb_size: u32, miesm: &MiesmTable, max_cb: u32) -> Result<f64, PhyError> {
    let mmib = mean_mmib(&[sinr], mcs, miesm)?;
    TransportBlock::segment(tb_size, mcs, mmib, max_cb)?.bler(miesm)
}

/// CQI thresholds: for each level, the lowest flat SINR at which a
/// full-size TB at that level's MCS meets `bler_target`.
pub fn derive_cqi_table(
    amc: &AmcTable,
    miesm: &MiesmTable,
    cfg: &FrameConfig,
    bler_target: f64,
    max_cb: u32,
) -> Result<CqiTable, PhyError> {
    let mut thresholds = [0.0; MAX_CQI as usize];
    let mut floor_db = f64::NEG_INFINITY;
    for (i, e) in amc.entries().iter().enumerate() {
        let tb = cqi_to_tb_size(e.cqi, amc, cfg).max(1);
        let bler_at = |db: f64| flat_sinr_bler(10f64.powf(db / 10.0), e.mcs, tb, miesm, max_cb);
        let (mut lo, mut hi) = (-60.0, 80.0);
        if bler_at(hi)? > bler_target {
            return Err(PhyError::MissingEntry(format!(
                "mcs {} never reaches BLER {bler_target} below {hi} dB",
                e.mcs
            )));
        }
        if bler_at(lo)? <= bler_target {
            hi = lo;
        }
        while hi - lo > 1e-6 {
            let mid = 0.5 * (lo + hi);
            if bler_at(mid)? <= bler_target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        floor_db = floor_db.max(hi);
        thresholds[i] = 10f64.powf(floor_db / 10.0);
    }
    CqiTable::new(thresholds)
}
