//! Frame and PHY numerology.
//!
//! [`FrameConfig`] holds the user-tunable frame structure (symbols, slots,
//! subframes, sub-bands, resource blocks, carrier) and derives the quantities
//! the rest of the simulator reads: TTI, resource-block bandwidth, system
//! bandwidth and resource elements per slot. It is validated once at
//! construction and immutable afterwards.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Kind of a slot as written in the TDD control/data pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlotKind {
    Control,
    Data,
}

impl SlotKind {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'c' => Some(SlotKind::Control),
            'd' => Some(SlotKind::Data),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            SlotKind::Control => 'c',
            SlotKind::Data => 'd',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{key}: pattern {pattern:?} has length {len}, expected SlotsPerSubframe = {expected}")]
    PatternLength {
        key: &'static str,
        pattern: String,
        len: usize,
        expected: usize,
    },
    #[error("{key}: pattern {pattern:?} contains {found:?}; only 'c' and 'd' are allowed")]
    PatternCharacter {
        key: &'static str,
        pattern: String,
        found: char,
    },
    #[error("{key}: count must be >= 1")]
    ZeroCount { key: &'static str },
    #[error("{key}: value {value} must be finite and > 0")]
    NonPositive { key: &'static str, value: f64 },
    #[error("{key}: {value} reference symbols must be fewer than SymbolPerSlot = {symbols}")]
    TooManyReferenceSymbols {
        key: &'static str,
        value: u32,
        symbols: u32,
    },
}

impl ConfigError {
    /// Configuration key the error refers to.
    pub fn key(&self) -> &'static str {
        match self {
            ConfigError::PatternLength { key, .. }
            | ConfigError::PatternCharacter { key, .. }
            | ConfigError::ZeroCount { key }
            | ConfigError::NonPositive { key, .. }
            | ConfigError::TooManyReferenceSymbols { key, .. } => key,
        }
    }
}

/// Raw frame section of a scenario file. Keys are the verbatim parameter
/// names; missing keys fall back to the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSection {
    #[serde(rename = "SymbolPerSlot")]
    pub symbol_per_slot: u32,
    #[serde(rename = "SymbolLength")]
    pub symbol_length: f64,
    #[serde(rename = "SlotsPerSubframe")]
    pub slots_per_subframe: u32,
    #[serde(rename = "SubframePerFrame")]
    pub subframe_per_frame: u32,
    #[serde(rename = "NumReferenceSymbols")]
    pub num_reference_symbols: u32,
    #[serde(rename = "TDDControlDataPattern")]
    pub tdd_control_data_pattern: String,
    #[serde(rename = "SubcarriersPerSubband")]
    pub subcarriers_per_subband: u32,
    #[serde(rename = "SubbandsPerRB")]
    pub subbands_per_rb: u32,
    #[serde(rename = "SubbandWidth")]
    pub subband_width: f64,
    #[serde(rename = "NumResourceBlock")]
    pub num_resource_block: u32,
    #[serde(rename = "CenterFreq")]
    pub center_freq: f64,
    #[serde(rename = "GuardTime")]
    pub guard_time: f64,
    #[serde(rename = "L1L2ControlLatency")]
    pub l1l2_control_latency: u32,
}

impl Default for FrameSection {
    fn default() -> Self {
        Self {
            symbol_per_slot: 30,
            symbol_length: 4.16e-6,
            slots_per_subframe: 8,
            subframe_per_frame: 10,
            num_reference_symbols: 6,
            tdd_control_data_pattern: "ccdddddd".to_string(),
            subcarriers_per_subband: 48,
            subbands_per_rb: 18,
            subband_width: 13.89e6,
            num_resource_block: 4,
            center_freq: 28e9,
            guard_time: 1e-6,
            l1l2_control_latency: 2,
        }
    }
}

/// Validated frame structure.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig<T: Real = f64> {
    symbols_per_slot: u32,
    symbol_length: T,
    slots_per_subframe: u32,
    subframes_per_frame: u32,
    num_reference_symbols: u32,
    tdd_pattern: Vec<SlotKind>,
    subcarriers_per_subband: u32,
    subbands_per_rb: u32,
    subband_width: T,
    num_resource_blocks: u32,
    center_freq: T,
    guard_time: T,
    l1l2_control_latency: u32,
}

impl<T: Real> Default for FrameConfig<T> {
    fn default() -> Self {
        Self::from_section(&FrameSection::default()).expect("default frame section is valid")
    }
}

/// Parses a TDD pattern string against the expected slot count.
pub fn parse_tdd_pattern(pattern: &str, slots: usize) -> Result<Vec<SlotKind>, ConfigError> {
    const KEY: &str = "TDDControlDataPattern";
    let kinds = pattern
        .chars()
        .map(|c| {
            SlotKind::from_char(c).ok_or_else(|| ConfigError::PatternCharacter {
                key: KEY,
                pattern: pattern.to_string(),
                found: c,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if kinds.len() != slots {
        return Err(ConfigError::PatternLength {
            key: KEY,
            pattern: pattern.to_string(),
            len: kinds.len(),
            expected: slots,
        });
    }
    Ok(kinds)
}

impl<T: Real> FrameConfig<T> {
    /// Validates a raw section, collecting every violated invariant.
    pub fn from_section(s: &FrameSection) -> Result<Self, Vec<ConfigError>> {
        let mut errors = Vec::new();
        let counts = [
            ("SymbolPerSlot", s.symbol_per_slot),
            ("SlotsPerSubframe", s.slots_per_subframe),
            ("SubframePerFrame", s.subframe_per_frame),
            ("SubcarriersPerSubband", s.subcarriers_per_subband),
            ("SubbandsPerRB", s.subbands_per_rb),
            ("NumResourceBlock", s.num_resource_block),
        ];
        for (key, v) in counts {
            if v == 0 {
                errors.push(ConfigError::ZeroCount { key });
            }
        }
        let physical = [
            ("SymbolLength", s.symbol_length),
            ("SubbandWidth", s.subband_width),
            ("CenterFreq", s.center_freq),
            ("GuardTime", s.guard_time),
        ];
        for (key, value) in physical {
            if !(value.is_finite() && value > 0.0) {
                errors.push(ConfigError::NonPositive { key, value });
            }
        }
        if s.symbol_per_slot > 0 && s.num_reference_symbols >= s.symbol_per_slot {
            errors.push(ConfigError::TooManyReferenceSymbols {
                key: "NumReferenceSymbols",
                value: s.num_reference_symbols,
                symbols: s.symbol_per_slot,
            });
        }
        let pattern =
            match parse_tdd_pattern(&s.tdd_control_data_pattern, s.slots_per_subframe as usize) {
                Ok(p) => p,
                Err(e) => {
                    errors.push(e);
                    Vec::new()
                }
            };
        if !errors.is_empty() {
            return Err(errors);
        }
        Ok(Self {
            symbols_per_slot: s.symbol_per_slot,
            symbol_length: T::lit(s.symbol_length),
            slots_per_subframe: s.slots_per_subframe,
            subframes_per_frame: s.subframe_per_frame,
            num_reference_symbols: s.num_reference_symbols,
            tdd_pattern: pattern,
            subcarriers_per_subband: s.subcarriers_per_subband,
            subbands_per_rb: s.subbands_per_rb,
            subband_width: T::lit(s.subband_width),
            num_resource_blocks: s.num_resource_block,
            center_freq: T::lit(s.center_freq),
            guard_time: T::lit(s.guard_time),
            l1l2_control_latency: s.l1l2_control_latency,
        })
    }

    /// Raw section that reproduces this configuration.
    pub fn to_section(&self) -> FrameSection {
        FrameSection {
            symbol_per_slot: self.symbols_per_slot,
            symbol_length: self.symbol_length.as_f64(),
            slots_per_subframe: self.slots_per_subframe,
            subframe_per_frame: self.subframes_per_frame,
            num_reference_symbols: self.num_reference_symbols,
            tdd_control_data_pattern: self.pattern_string(),
            subcarriers_per_subband: self.subcarriers_per_subband,
            subbands_per_rb: self.subbands_per_rb,
            subband_width: self.subband_width.as_f64(),
            num_resource_block: self.num_resource_blocks,
            center_freq: self.center_freq.as_f64(),
            guard_time: self.guard_time.as_f64(),
            l1l2_control_latency: self.l1l2_control_latency,
        }
    }

    pub fn symbols_per_slot(&self) -> u32 {
        self.symbols_per_slot
    }
    pub fn symbol_length(&self) -> T {
        self.symbol_length
    }
    pub fn slots_per_subframe(&self) -> u32 {
        self.slots_per_subframe
    }
    pub fn subframes_per_frame(&self) -> u32 {
        self.subframes_per_frame
    }
    pub fn num_reference_symbols(&self) -> u32 {
        self.num_reference_symbols
    }
    pub fn tdd_pattern(&self) -> &[SlotKind] {
        &self.tdd_pattern
    }
    pub fn pattern_string(&self) -> String {
        self.tdd_pattern.iter().map(|k| k.as_char()).collect()
    }
    pub fn subcarriers_per_subband(&self) -> u32 {
        self.subcarriers_per_subband
    }
    pub fn subbands_per_rb(&self) -> u32 {
        self.subbands_per_rb
    }
    pub fn subband_width(&self) -> T {
        self.subband_width
    }
    pub fn num_resource_blocks(&self) -> u32 {
        self.num_resource_blocks
    }
    pub fn center_freq(&self) -> T {
        self.center_freq
    }
    pub fn guard_time(&self) -> T {
        self.guard_time
    }
    pub fn l1l2_control_latency(&self) -> u32 {
        self.l1l2_control_latency
    }

    /// Transmission time interval: the duration of one slot.
    pub fn tti(&self) -> T {
        T::from_count(self.symbols_per_slot as usize) * self.symbol_length
    }

    /// TTI in integer nanoseconds, the simulator's clock resolution.
    pub fn tti_ns(&self) -> u64 {
        (self.tti().as_f64() * 1e9).round() as u64
    }

    pub fn rb_bandwidth(&self) -> T {
        T::from_count(self.subbands_per_rb as usize) * self.subband_width
    }

    pub fn system_bandwidth(&self) -> T {
        self.rb_bandwidth() * T::from_count(self.num_resource_blocks as usize)
    }

    pub fn resource_elements_per_slot(&self) -> u64 {
        self.symbols_per_slot as u64
            * self.subcarriers_per_subband as u64
            * self.subbands_per_rb as u64
            * self.num_resource_blocks as u64
    }

    /// Total number of sub-bands across the system bandwidth.
    pub fn num_subbands(&self) -> usize {
        self.subbands_per_rb as usize * self.num_resource_blocks as usize
    }

    /// Sub-carriers across the whole band.
    pub fn total_subcarriers(&self) -> u64 {
        self.num_subbands() as u64 * self.subcarriers_per_subband as u64
    }

    /// Centre of sub-band `index` as an offset from the carrier, in Hz.
    pub fn subband_offset(&self, index: usize) -> T {
        let half = T::lit(0.5);
        (T::from_count(index) + half) * self.subband_width - self.system_bandwidth() * half
    }

    /// Symbols lost to the UL/DL switching gap in a slot that changes direction.
    pub fn guard_symbols(&self) -> u32 {
        let n = (self.guard_time / self.symbol_length).ceil();
        n.to_u32().unwrap_or(u32::MAX).min(self.symbols_per_slot)
    }

    /// Symbols carrying data in a data slot.
    pub fn data_symbols(&self, direction_switch: bool) -> u32 {
        let base = self.symbols_per_slot - self.num_reference_symbols;
        if direction_switch {
            base.saturating_sub(self.guard_symbols())
        } else {
            base
        }
    }

    /// Duration of one subframe in nanoseconds.
    pub fn subframe_ns(&self) -> u64 {
        self.tti_ns() * self.slots_per_subframe as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn section(f: impl FnOnce(&mut FrameSection)) -> FrameSection {
        let mut s = FrameSection::default();
        f(&mut s);
        s
    }

    #[test]
    fn defaults_match_table() {
        let cfg: FrameConfig = FrameConfig::default();
        assert_eq!(cfg.resource_elements_per_slot(), 103_680);
        assert_eq!(cfg.tti(), 30.0 * 4.16e-6);
        assert!((cfg.tti() - 124.8e-6).abs() < 1e-15);
        assert!((cfg.rb_bandwidth() - 250.02e6).abs() < 1e-3);
        assert!((cfg.system_bandwidth() - 1000.08e6).abs() < 1e-2);
        assert_eq!(cfg.tti_ns(), 124_800);
        assert_eq!(cfg.num_subbands(), 72);
    }

    #[test]
    fn trivial_and_hand_checked_products() {
        let one: FrameConfig = FrameConfig::from_section(&section(|s| {
            s.symbol_per_slot = 1;
            s.symbol_length = 1.0;
            s.num_reference_symbols = 0;
            s.subbands_per_rb = 1;
            s.subband_width = 1.0;
            s.num_resource_block = 1;
            s.subcarriers_per_subband = 1;
        }))
        .unwrap();
        assert_eq!(one.tti(), 1.0);
        assert_eq!(one.rb_bandwidth(), 1.0);
        assert_eq!(one.system_bandwidth(), one.rb_bandwidth());
        assert_eq!(one.resource_elements_per_slot(), 1);

        let lte: FrameConfig = FrameConfig::from_section(&section(|s| {
            s.symbol_per_slot = 14;
            s.symbol_length = 71.4e-6;
            s.num_reference_symbols = 2;
            s.subbands_per_rb = 12;
            s.subband_width = 15e3;
            s.num_resource_block = 100;
        }))
        .unwrap();
        assert!((lte.tti() - 999.6e-6).abs() < 1e-15);
        assert!((lte.rb_bandwidth() - 180e3).abs() < 1e-9);
        assert!((lte.system_bandwidth() - 18e6).abs() < 1e-6);

        let small: FrameConfig = FrameConfig::from_section(&section(|s| {
            s.symbol_per_slot = 2;
            s.num_reference_symbols = 1;
            s.subcarriers_per_subband = 3;
            s.subbands_per_rb = 4;
            s.num_resource_block = 5;
        }))
        .unwrap();
        assert_eq!(small.resource_elements_per_slot(), 120);
    }

    #[test]
    fn rejects_bad_pattern() {
        let e = FrameConfig::<f64>::from_section(&section(|s| {
            s.tdd_control_data_pattern = "ccxddddd".into()
        }))
        .unwrap_err();
        assert!(matches!(e[0], ConfigError::PatternCharacter { found: 'x', .. }));
        let e = FrameConfig::<f64>::from_section(&section(|s| {
            s.tdd_control_data_pattern = "ccddd".into()
        }))
        .unwrap_err();
        assert!(matches!(e[0], ConfigError::PatternLength { len: 5, expected: 8, .. }));
    }

    #[test]
    fn collects_every_violation() {
        let e = FrameConfig::<f64>::from_section(&section(|s| {
            s.subband_width = -1.0;
            s.num_resource_block = 0;
            s.num_reference_symbols = 30;
        }))
        .unwrap_err();
        let keys: Vec<_> = e.iter().map(ConfigError::key).collect();
        assert!(keys.contains(&"SubbandWidth"));
        assert!(keys.contains(&"NumResourceBlock"));
        assert!(keys.contains(&"NumReferenceSymbols"));
    }

    #[test]
    fn guard_costs_one_symbol_by_default() {
        let cfg: FrameConfig = FrameConfig::default();
        assert_eq!(cfg.guard_symbols(), 1);
        assert_eq!(cfg.data_symbols(false), 24);
        assert_eq!(cfg.data_symbols(true), 23);
    }

    #[test]
    fn subband_offsets_span_band_symmetrically() {
        let cfg: FrameConfig = FrameConfig::default();
        let first = cfg.subband_offset(0);
        let last = cfg.subband_offset(cfg.num_subbands() - 1);
        assert!((first + last).abs() < 1e-3);
        assert!(first < 0.0 && last > 0.0);
    }

    #[test]
    fn single_precision_config() {
        let cfg: FrameConfig<f32> = FrameConfig::default();
        assert!((cfg.tti() - 124.8e-6).abs() < 1e-10);
        assert_eq!(cfg.resource_elements_per_slot(), 103_680);
    }

    #[test]
    fn section_round_trip() {
        let cfg: FrameConfig = FrameConfig::default();
        assert_eq!(FrameConfig::from_section(&cfg.to_section()).unwrap(), cfg);
    }
}
