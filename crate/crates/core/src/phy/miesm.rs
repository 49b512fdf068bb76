//! MIESM tables: SINR to mean mutual information per coded bit (MMIB) and
//! per-MCS Gaussian fits of codeblock BLER versus MMIB.
//!
//! File grammar, one record per line, `#` starts a comment:
//!
//! ```text
//! mmib <modulation_order> <sinr_db> <mmib>
//! bler <mcs> <modulation_order> <cb_size_class> <b> <c>
//! ```
//!
//! `mmib` samples of one modulation order must be strictly increasing in SINR,
//! non-decreasing in MMIB and inside `[0, 1]`. A `bler` row applies to
//! codeblocks of at most `cb_size_class` bits; larger blocks use the largest
//! class of that MCS.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use super::PhyError;
use crate::scalar::Real;

/// Bundled default table.
pub const DEFAULT_TABLE: &str = include_str!("../../data/miesm_default.txt");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlerFit {
    pub cb_size_class: u32,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiesmTable {
    curves: BTreeMap<u8, Vec<(f64, f64)>>,
    fits: BTreeMap<u8, Vec<BlerFit>>,
    modulation: BTreeMap<u8, u8>,
    digest: String,
}

fn parse_err(line: usize, msg: impl Into<String>) -> PhyError {
    PhyError::TableParse {
        line,
        msg: msg.into(),
    }
}

fn field<F: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<F, PhyError> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("malformed {what}")))
}

impl MiesmTable {
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled MIESM table parses")
    }

    pub fn parse(src: &str) -> Result<Self, PhyError> {
        let mut curves: BTreeMap<u8, Vec<(f64, f64)>> = BTreeMap::new();
        let mut fits: BTreeMap<u8, Vec<BlerFit>> = BTreeMap::new();
        let mut modulation = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let mut toks = text.split_whitespace();
            let kind = toks.next().unwrap_or_default();
            match kind {
                "mmib" => {
                    let q: u8 = field(toks.next(), line, "modulation order")?;
                    let s: f64 = field(toks.next(), line, "sinr_db")?;
                    let m: f64 = field(toks.next(), line, "mmib")?;
                    if !s.is_finite() || !(0.0..=1.0).contains(&m) {
                        return Err(parse_err(line, "mmib must lie in [0,1] at a finite SINR"));
                    }
                    let curve = curves.entry(q).or_default();
                    if let Some(&(ps, pm)) = curve.last() {
                        if s <= ps || m < pm {
                            return Err(parse_err(line, "mmib curve must be increasing in SINR and non-decreasing"));
                        }
                    }
                    curve.push((s, m));
                }
                "bler" => {
                    let mcs: u8 = field(toks.next(), line, "mcs")?;
                    let q: u8 = field(toks.next(), line, "modulation order")?;
                    let class: u32 = field(toks.next(), line, "cb_size_class")?;
                    let b: f64 = field(toks.next(), line, "b")?;
                    let c: f64 = field(toks.next(), line, "c")?;
                    if !(c > 0.0 && c.is_finite() && b.is_finite()) {
                        return Err(parse_err(line, "fit needs finite b and c > 0"));
                    }
                    if let Some(prev) = modulation.insert(mcs, q) {
                        if prev != q {
                            return Err(parse_err(line, format!("mcs {mcs} listed with two modulation orders")));
                        }
                    }
                    let rows = fits.entry(mcs).or_default();
                    if rows.last().is_some_and(|r| r.cb_size_class >= class) {
                        return Err(parse_err(line, "cb_size_class must increase within an mcs"));
                    }
                    rows.push(BlerFit {
                        cb_size_class: class,
                        b,
                        c,
                    });
                }
                other => return Err(parse_err(line, format!("unknown record {other:?}"))),
            }
            if toks.next().is_some() {
                return Err(parse_err(line, "trailing fields"));
            }
        }
        for (mcs, q) in &modulation {
            if !curves.contains_key(q) {
                return Err(PhyError::MissingEntry(format!(
                    "mcs {mcs} uses modulation order {q} without an mmib curve"
                )));
            }
        }
        let digest = Sha256::digest(src.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Ok(Self {
            curves,
            fits,
            modulation,
            digest,
        })
    }

    /// SHA-256 of the source text, hex encoded.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn modulation_order(&self, mcs: u8) -> Result<u8, PhyError> {
        self.modulation
            .get(&mcs)
            .copied()
            .ok_or_else(|| PhyError::MissingEntry(format!("mcs {mcs}")))
    }

    pub fn mcs_indices(&self) -> impl Iterator<Item = u8> + '_ {
        self.modulation.keys().copied()
    }

    pub fn curve(&self, modulation_order: u8) -> Option<&[(f64, f64)]> {
        self.curves.get(&modulation_order).map(Vec::as_slice)
    }

    /// Fit for a codeblock of `cb_size` bits under `mcs`.
    pub fn fit(&self, mcs: u8, cb_size: u32) -> Result<BlerFit, PhyError> {
        let rows = self
            .fits
            .get(&mcs)
            .ok_or_else(|| PhyError::MissingEntry(format!("bler fit for mcs {mcs}")))?;
        Ok(*rows
            .iter()
            .find(|r| cb_size <= r.cb_size_class)
            .unwrap_or_else(|| rows.last().expect("non-empty by construction")))
    }
}

/// Interpolated MMIB of a curve at a linear SINR.
fn interpolate(curve: &[(f64, f64)], sinr: f64) -> f64 {
    if !(sinr > 0.0) {
        return 0.0;
    }
    let s_db = 10.0 * sinr.log10();
    let (s0, m0) = curve[0];
    if s_db <= s0 {
        // linear ramp from the origin in linear SINR
        return m0 * sinr / 10f64.powf(s0 / 10.0);
    }
    let (sn, mn) = curve[curve.len() - 1];
    if s_db >= sn {
        return mn;
    }
    let k = curve.partition_point(|&(s, _)| s <= s_db);
    let (sa, ma) = curve[k - 1];
    let (sb, mb) = curve[k];
    ma + (mb - ma) * (s_db - sa) / (sb - sa)
}

/// Lowest linear SINR at which a curve reaches `mmib`.
fn invert(curve: &[(f64, f64)], mmib: f64) -> f64 {
    let (s0, m0) = curve[0];
    if !(mmib > 0.0) {
        return 0.0;
    }
    if mmib <= m0 {
        return mmib / m0 * 10f64.powf(s0 / 10.0);
    }
    let k = curve.partition_point(|&(_, m)| m < mmib);
    if k == curve.len() {
        let top = curve[curve.len() - 1].1;
        let first = curve.iter().find(|p| p.1 >= top).expect("non-empty");
        return 10f64.powf(first.0 / 10.0);
    }
    let (sa, ma) = curve[k - 1];
    let (sb, mb) = curve[k];
    10f64.powf((sa + (sb - sa) * (mmib - ma) / (mb - ma)) / 10.0)
}

/// Mean mutual information per coded bit for `mcs` at linear `sinr`.
pub fn sinr_to_mmib<T: Real>(sinr: T, mcs: u8, table: &MiesmTable) -> Result<T, PhyError> {
    let q = table.modulation_order(mcs)?;
    let curve = table
        .curve(q)
        .ok_or_else(|| PhyError::MissingEntry(format!("mmib curve for modulation order {q}")))?;
    Ok(T::lit(interpolate(curve, sinr.as_f64()).clamp(0.0, 1.0)))
}

/// Mean MMIB over a set of sub-band SINRs: the effective-SINR reduction.
pub fn mean_mmib<T: Real>(sinrs: &[T], mcs: u8, table: &MiesmTable) -> Result<T, PhyError> {
    if sinrs.is_empty() {
        return Ok(T::zero());
    }
    let mut acc = T::zero();
    for s in sinrs {
        acc += sinr_to_mmib(*s, mcs, table)?;
    }
    Ok(acc / T::from_count(sinrs.len()))
}

/// Flat SINR carrying the same mean MMIB as `sinrs` under `mcs`.
pub fn effective_sinr<T: Real>(sinrs: &[T], mcs: u8, table: &MiesmTable) -> Result<T, PhyError> {
    let q = table.modulation_order(mcs)?;
    let curve = table
        .curve(q)
        .ok_or_else(|| PhyError::MissingEntry(format!("mmib curve for modulation order {q}")))?;
    let m = mean_mmib(sinrs, mcs, table)?.as_f64();
    Ok(T::lit(invert(curve, m)))
}
