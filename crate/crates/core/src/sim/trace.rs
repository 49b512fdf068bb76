//! Trace records, their CSV form, and the summaries computed from them.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::channel::LinkState;
use crate::config::SlotKind;
use crate::mac::{Direction, SapRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotOutcome {
    Decoded,
    Dropped,
    /// Slot assigned but no TB sent (CQI 0 or nothing queued).
    Idle,
}

/// One data slot of one active link.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotTrace {
    pub time_ns: u64,
    pub frame: u64,
    /// Subframe within the frame.
    pub subframe: u32,
    /// Slot within the subframe, 0-based.
    pub slot: u32,
    pub link: usize,
    pub bs: usize,
    pub user: u32,
    pub direction: Direction,
    pub kind: SlotKind,
    pub distance_m: f64,
    pub link_state: LinkState,
    pub pathloss_db: f64,
    pub bf_gain_db: f64,
    pub subband_sinr_db: Vec<f64>,
    pub wideband_sinr_db: f64,
    /// CQI the user derives from this slot's measurement.
    pub cqi: u8,
    /// MCS of the allocation.
    pub mcs: Option<u8>,
    pub tb_size_bits: u32,
    pub tb_bler: f64,
    pub outcome: SlotOutcome,
    pub delivered_bits: u32,
    /// Large-scale epoch of the serving link.
    pub realization: u64,
}

impl SlotTrace {
    pub fn time_s(&self) -> f64 {
        self.time_ns as f64 * 1e-9
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SlotTraceRow {
    time_ns: u64,
    time_s: f64,
    frame: u64,
    subframe: u32,
    slot: u32,
    link: usize,
    bs: usize,
    user: u32,
    direction: Direction,
    kind: SlotKind,
    distance_m: f64,
    link_state: LinkState,
    pathloss_db: f64,
    bf_gain_db: f64,
    wideband_sinr_db: f64,
    cqi: u8,
    mcs: Option<u8>,
    tb_size_bits: u32,
    tb_bler: f64,
    outcome: SlotOutcome,
    delivered_bits: u32,
    realization: u64,
    subband_sinr_db: String,
}

impl From<&SlotTrace> for SlotTraceRow {
    fn from(t: &SlotTrace) -> Self {
        Self {
            time_ns: t.time_ns,
            time_s: t.time_s(),
            frame: t.frame,
            subframe: t.subframe,
            slot: t.slot,
            link: t.link,
            bs: t.bs,
            user: t.user,
            direction: t.direction,
            kind: t.kind,
            distance_m: t.distance_m,
            link_state: t.link_state,
            pathloss_db: t.pathloss_db,
            bf_gain_db: t.bf_gain_db,
            wideband_sinr_db: t.wideband_sinr_db,
            cqi: t.cqi,
            mcs: t.mcs,
            tb_size_bits: t.tb_size_bits,
            tb_bler: t.tb_bler,
            outcome: t.outcome,
            delivered_bits: t.delivered_bits,
            realization: t.realization,
            subband_sinr_db: t
                .subband_sinr_db
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        }
    }
}

impl TryFrom<SlotTraceRow> for SlotTrace {
    type Error = SimError;

    fn try_from(r: SlotTraceRow) -> Result<Self, SimError> {
        let subband_sinr_db = if r.subband_sinr_db.is_empty() {
            Vec::new()
        } else {
            r.subband_sinr_db
                .split(';')
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| SimError::Trace(format!("bad sub-band SINR {x:?}")))
                })
                .collect::<Result<_, _>>()?
        };
        Ok(Self {
            time_ns: r.time_ns,
            frame: r.frame,
            subframe: r.subframe,
            slot: r.slot,
            link: r.link,
            bs: r.bs,
            user: r.user,
            direction: r.direction,
            kind: r.kind,
            distance_m: r.distance_m,
            link_state: r.link_state,
            pathloss_db: r.pathloss_db,
            bf_gain_db: r.bf_gain_db,
            subband_sinr_db,
            wideband_sinr_db: r.wideband_sinr_db,
            cqi: r.cqi,
            mcs: r.mcs,
            tb_size_bits: r.tb_size_bits,
            tb_bler: r.tb_bler,
            outcome: r.outcome,
            delivered_bits: r.delivered_bits,
            realization: r.realization,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridEvent {
    Slot,
    LargeScaleUpdate,
}

/// Beamformed gain of one serving link on one sub-band at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub time_ns: u64,
    pub event: GridEvent,
    pub link: usize,
    pub bs: usize,
    pub user: u32,
    pub realization: u64,
    pub subband: usize,
    pub freq_offset_hz: f64,
    pub gain_db: f64,
}

pub fn write_slot_traces<W: Write>(traces: &[SlotTrace], w: W) -> Result<(), SimError> {
    let mut out = csv::Writer::from_writer(w);
    for t in traces {
        out.serialize(SlotTraceRow::from(t))?;
    }
    if traces.is_empty() {
        out.write_record(SLOT_TRACE_HEADER)?;
    }
    out.flush()?;
    Ok(())
}

/// Column names of the slot-trace CSV, in order.
pub const SLOT_TRACE_HEADER: [&str; 23] = [
    "time_ns",
    "time_s",
    "frame",
    "subframe",
    "slot",
    "link",
    "bs",
    "user",
    "direction",
    "kind",
    "distance_m",
    "link_state",
    "pathloss_db",
    "bf_gain_db",
    "wideband_sinr_db",
    "cqi",
    "mcs",
    "tb_size_bits",
    "tb_bler",
    "outcome",
    "delivered_bits",
    "realization",
    "subband_sinr_db",
];

pub fn read_slot_traces<R: Read>(r: R) -> Result<Vec<SlotTrace>, SimError> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize::<SlotTraceRow>()
        .map(|row| SlotTrace::try_from(row?))
        .collect()
}

pub fn write_sap_log<W: Write>(log: &[SapRecord], w: W) -> Result<(), SimError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time_ns", "bs", "message", "fields"])?;
    for r in log {
        out.write_record([
            r.time_ns.to_string(),
            r.bs.to_string(),
            r.message.name().to_string(),
            r.message.fields(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_channel_grid<W: Write>(rows: &[GridRow], w: W) -> Result<(), SimError> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_channel_grid<R: Read>(r: R) -> Result<Vec<GridRow>, SimError> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|row| row.map_err(SimError::from)).collect()
}

pub fn read_slot_traces_file(path: &Path) -> Result<Vec<SlotTrace>, SimError> {
    read_slot_traces(File::open(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBin {
    pub lower_m: f64,
    pub upper_m: f64,
    /// Linear mean of the wideband SINR, in dB.
    pub mean_sinr_db: f64,
    pub count: usize,
}

impl DistanceBin {
    pub fn centre_m(&self) -> f64 {
        0.5 * (self.lower_m + self.upper_m)
    }
}

/// Mean wideband SINR in dB per `bin_width`-metre distance bin, ascending.
pub fn average_sinr_vs_distance(traces: &[SlotTrace], bin_width: f64) -> Result<Vec<DistanceBin>, SimError> {
    if traces.is_empty() {
        return Err(SimError::EmptyTraces);
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(SimError::NonPositiveWindow);
    }
    let mut bins: std::collections::BTreeMap<i64, (f64, usize)> = Default::default();
    for t in traces {
        let k = (t.distance_m / bin_width).floor() as i64;
        let e = bins.entry(k).or_insert((0.0, 0));
        e.0 += t.wideband_sinr_db;
        e.1 += 1;
    }
    Ok(bins
        .into_iter()
        .map(|(k, (sum, n))| DistanceBin {
            lower_m: k as f64 * bin_width,
            upper_m: (k + 1) as f64 * bin_width,
            mean_sinr_db: sum / n as f64,
            count: n,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputPoint {
    pub start_s: f64,
    pub bits_per_second: f64,
}

/// Delivered bits per `window`-second window, from t = 0 to the last trace.
pub fn throughput_vs_time(traces: &[SlotTrace], window: f64) -> Result<Vec<ThroughputPoint>, SimError> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(SimError::NonPositiveWindow);
    }
    let Some(last) = traces.iter().map(|t| t.time_ns).max() else {
        return Ok(Vec::new());
    };
    let window_ns = (window * 1e9).round().max(1.0) as u64;
    let mut bits = vec![0u64; (last / window_ns) as usize + 1];
    for t in traces {
        bits[(t.time_ns / window_ns) as usize] += t.delivered_bits as u64;
    }
    Ok(bits
        .into_iter()
        .enumerate()
        .map(|(i, b)| ThroughputPoint {
            start_s: i as f64 * window_ns as f64 * 1e-9,
            bits_per_second: b as f64 / window,
        })
        .collect())
}
