//! Binary container for realization pools.
//!
//! Little-endian layout:
//!
//! ```text
//! magic        8 bytes  "MMWPOOL\0"
//! version      u32      1
//! count        u32
//! per realization:
//!   tx_antennas   u32
//!   rx_antennas   u32
//!   num_clusters  u32
//!   cluster_sizes u32 × num_clusters          (n = Σ sizes)
//!   subpaths      n × (power f64, aoa_rel_motion f64, delay f64)
//!   tx matrix     tx_antennas × n complex, row-major, (re f64, im f64)
//!   rx matrix     rx_antennas × n complex, row-major, (re f64, im f64)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex;

use super::fading::{SpatialChannel, Subpath};
use super::linalg::CMatrix;
use super::pool::RealizationPool;
use super::ChannelError;
use crate::scalar::Real;

pub const MAGIC: &[u8; 8] = b"MMWPOOL\0";
pub const VERSION: u32 = 1;

// Upper bounds guarding allocations against corrupt headers.
const MAX_ANTENNAS: u32 = 1 << 16;
const MAX_SUBPATHS: u32 = 1 << 16;

pub fn write_pool<T: Real, W: Write>(pool: &RealizationPool<T>, mut w: W) -> Result<(), ChannelError> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(pool.len() as u32)?;
    for s in pool.entries() {
        w.write_u32::<LittleEndian>(s.tx_antennas() as u32)?;
        w.write_u32::<LittleEndian>(s.rx_antennas() as u32)?;
        w.write_u32::<LittleEndian>(s.num_clusters() as u32)?;
        for &l in s.cluster_sizes() {
            w.write_u32::<LittleEndian>(l as u32)?;
        }
        for p in s.subpaths() {
            w.write_f64::<LittleEndian>(p.power.as_f64())?;
            w.write_f64::<LittleEndian>(p.aoa_rel_motion.as_f64())?;
            w.write_f64::<LittleEndian>(p.delay.as_f64())?;
        }
        for m in [s.tx_spatial(), s.rx_spatial()] {
            for z in m.as_slice() {
                w.write_f64::<LittleEndian>(z.re.as_f64())?;
                w.write_f64::<LittleEndian>(z.im.as_f64())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn read_matrix<T: Real, R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<CMatrix<T>, ChannelError> {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re = r.read_f64::<LittleEndian>()?;
        let im = r.read_f64::<LittleEndian>()?;
        data.push(Complex::new(T::lit(re), T::lit(im)));
    }
    Ok(CMatrix::from_row_major(rows, cols, data).expect("length matches by construction"))
}

pub fn read_pool<T: Real, R: Read>(mut r: R) -> Result<RealizationPool<T>, ChannelError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(ChannelError::Format("bad magic".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(ChannelError::Format(format!("unsupported version {version}")));
    }
    let count = r.read_u32::<LittleEndian>()?;
    let mut entries = Vec::new();
    for i in 0..count {
        let tx = r.read_u32::<LittleEndian>()?;
        let rx = r.read_u32::<LittleEndian>()?;
        let k = r.read_u32::<LittleEndian>()?;
        if tx > MAX_ANTENNAS || rx > MAX_ANTENNAS || k > MAX_SUBPATHS {
            return Err(ChannelError::Format(format!("realization {i}: implausible header")));
        }
        let sizes = (0..k)
            .map(|_| r.read_u32::<LittleEndian>().map(|v| v as usize))
            .collect::<Result<Vec<_>, _>>()?;
        let n: usize = sizes.iter().sum();
        if n > MAX_SUBPATHS as usize {
            return Err(ChannelError::Format(format!("realization {i}: too many subpaths")));
        }
        let mut subpaths = Vec::with_capacity(n);
        for _ in 0..n {
            subpaths.push(Subpath {
                power: T::lit(r.read_f64::<LittleEndian>()?),
                aoa_rel_motion: T::lit(r.read_f64::<LittleEndian>()?),
                delay: T::lit(r.read_f64::<LittleEndian>()?),
            });
        }
        let txm = read_matrix(&mut r, tx as usize, n)?;
        let rxm = read_matrix(&mut r, rx as usize, n)?;
        entries.push(SpatialChannel::new(txm, rxm, subpaths, sizes)?);
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(ChannelError::Format("trailing bytes after last realization".into()));
    }
    RealizationPool::new(entries)
}

pub fn save_pool<T: Real>(pool: &RealizationPool<T>, path: &Path) -> Result<(), ChannelError> {
    write_pool(pool, BufWriter::new(File::create(path)?))
}

pub fn load_pool<T: Real>(path: &Path) -> Result<RealizationPool<T>, ChannelError> {
    read_pool(BufReader::new(File::open(path)?))
}
