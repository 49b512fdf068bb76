//! Per-slot physical layer: link budget, SINR, MIESM error model and CQI.

mod cqi;
mod error_model;
mod miesm;
mod sinr;

use thiserror::Error;

pub use cqi::{sinr_to_cqi, subband_cqi, CqiTable, MAX_CQI};
pub use error_model::{
    codeblock_bler, decide_decode, transport_block_bler, Codeblock, DecodeOutcome, TransportBlock, CRC_BITS,
    DEFAULT_MAX_CB_BITS,
};
pub use miesm::{effective_sinr, mean_mmib, sinr_to_mmib, BlerFit, MiesmTable, DEFAULT_TABLE};
pub use sinr::{
    compute_sinr, dbm_to_watts, noise_power, rx_power_dbm, thermal_noise_psd, LinkPower, SinrRecord, BOLTZMANN,
    NOISE_TEMPERATURE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhyError {
    #[error("BLER fit needs c > 0")]
    InvalidFit,
    #[error("missing MIESM table entry: {0}")]
    MissingEntry(String),
    #[error("MIESM table line {line}: {msg}")]
    TableParse { line: usize, msg: String },
    #[error("transport block has no payload")]
    EmptyTransportBlock,
    #[error("maximum codeblock size {0} leaves no room for the CRC")]
    InvalidSegmentation(u32),
    #[error("CQI thresholds must be non-negative and non-decreasing")]
    InvalidCqiThresholds,
}
