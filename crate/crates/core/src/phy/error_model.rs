//! Link-to-system error model: codeblock segmentation, codeblock and
//! transport-block BLER, and the probabilistic decode decision.

use super::miesm::MiesmTable;
use super::PhyError;
use crate::scalar::Real;

/// CRC attached to a transport block and to each codeblock when segmented.
pub const CRC_BITS: u32 = 24;
/// Default maximum codeblock size, bits.
pub const DEFAULT_MAX_CB_BITS: u32 = 6144;

/// `½·[1 − erf((γ − b) / (√2·c))]`.
pub fn codeblock_bler<T: Real>(gamma: T, b: T, c: T) -> Result<T, PhyError> {
    if !(c > T::zero()) {
        return Err(PhyError::InvalidFit);
    }
    let half = T::lit(0.5);
    Ok(half * (T::one() - ((gamma - b) / (T::SQRT_2() * c)).erf()))
}

/// `1 − Π(1 − p_i)`.
pub fn transport_block_bler<T: Real>(cb_blers: &[T]) -> T {
    T::one() - cb_blers.iter().fold(T::one(), |acc, p| acc * (T::one() - *p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codeblock<T: Real = f64> {
    pub size: u32,
    pub mmib: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportBlock<T: Real = f64> {
    /// Payload bits, excluding CRC.
    pub size: u32,
    pub mcs: u8,
    pub codeblocks: Vec<Codeblock<T>>,
    pub crc_length: u32,
}

impl<T: Real> TransportBlock<T> {
    /// Splits a payload into equal-size codeblocks no larger than `max_cb`
    /// bits, each inheriting `mmib`.
    pub fn segment(size: u32, mcs: u8, mmib: T, max_cb: u32) -> Result<Self, PhyError> {
        if size == 0 {
            return Err(PhyError::EmptyTransportBlock);
        }
        if max_cb <= CRC_BITS {
            return Err(PhyError::InvalidSegmentation(max_cb));
        }
        let with_crc = size as u64 + CRC_BITS as u64;
        let (count, cb_size) = if with_crc <= max_cb as u64 {
            (1u64, with_crc)
        } else {
            let count = with_crc.div_ceil((max_cb - CRC_BITS) as u64);
            (count, (with_crc + count * CRC_BITS as u64).div_ceil(count))
        };
        Ok(Self {
            size,
            mcs,
            codeblocks: vec![
                Codeblock {
                    size: cb_size as u32,
                    mmib
                };
                count as usize
            ],
            crc_length: CRC_BITS,
        })
    }

    /// Bits added on top of the payload: CRCs and filler.
    pub fn overhead(&self) -> u64 {
        self.codeblocks.iter().map(|c| c.size as u64).sum::<u64>() - self.size as u64
    }

    /// Per-codeblock BLERs from the table's fits.
    pub fn codeblock_blers(&self, table: &MiesmTable) -> Result<Vec<T>, PhyError> {
        self.codeblocks
            .iter()
            .map(|cb| {
                let fit = table.fit(self.mcs, cb.size)?;
                codeblock_bler(cb.mmib, T::lit(fit.b), T::lit(fit.c))
            })
            .collect()
    }

    pub fn bler(&self, table: &MiesmTable) -> Result<T, PhyError> {
        Ok(transport_block_bler(&self.codeblock_blers(table)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodeOutcome {
    Decoded,
    /// Not delivered upward; a retransmission would be requested.
    Dropped,
}

impl DecodeOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodeOutcome::Decoded => "decoded",
            DecodeOutcome::Dropped => "dropped",
        }
    }

    pub fn needs_retransmission(self) -> bool {
        self == DecodeOutcome::Dropped
    }
}

/// Dropped iff `uniform_draw < tb_bler`.
pub fn decide_decode<T: Real>(tb_bler: T, uniform_draw: T) -> DecodeOutcome {
    if uniform_draw < tb_bler {
        DecodeOutcome::Dropped
    } else {
        DecodeOutcome::Decoded
    }
}
