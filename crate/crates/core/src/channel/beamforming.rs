//! Beamforming vectors by power iteration and the resulting link gain.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::fading::SpatialChannel;
use super::linalg::{dot_conj, normalized, CMatrix};
use super::ChannelError;
use crate::scalar::Real;

/// Transmit and receive antenna weights for one link, both unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingPair<T: Real = f64> {
    pub tx_weights: Vec<Complex<T>>,
    pub rx_weights: Vec<Complex<T>>,
}

impl<T: Real> BeamformingPair<T> {
    /// Normalises both vectors; fails on a zero vector.
    pub fn new(tx: &[Complex<T>], rx: &[Complex<T>]) -> Result<Self, ChannelError> {
        Ok(Self {
            tx_weights: normalized(tx).ok_or(ChannelError::ZeroChannel)?,
            rx_weights: normalized(rx).ok_or(ChannelError::ZeroChannel)?,
        })
    }
}

/// Stopping rule for the power iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerIteration {
    pub iterations: usize,
    /// Relative change of the Rayleigh quotient below which iteration stops.
    pub tolerance: f64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            iterations: 100,
            tolerance: 1e-12,
        }
    }
}

/// Dominant eigenvector of a Hermitian PSD matrix and its Rayleigh quotient.
fn dominant_eigvec<T: Real>(g: &CMatrix<T>, opts: PowerIteration) -> Result<(Vec<Complex<T>>, T), ChannelError> {
    let n = g.rows();
    // start from the Gram column with the largest diagonal entry
    let start = (0..n)
        .max_by(|&a, &b| {
            g.get(a, a)
                .re
                .partial_cmp(&g.get(b, b).re)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or(ChannelError::ZeroChannel)?;
    let mut x = normalized(&g.column(start)).ok_or(ChannelError::ZeroChannel)?;
    let tol = T::lit(opts.tolerance);
    let mut lambda = dot_conj(&x, &g.mul_vec(&x)).re;
    for _ in 0..opts.iterations.max(1) {
        let y = g.mul_vec(&x);
        let next = match normalized(&y) {
            Some(v) => v,
            None => break,
        };
        let next_lambda = dot_conj(&next, &g.mul_vec(&next)).re;
        x = next;
        let change = (next_lambda - lambda).abs();
        lambda = next_lambda;
        if change <= tol * lambda.abs() {
            break;
        }
    }
    Ok((x, lambda))
}

/// Beamforming pair approximating the dominant singular vectors of `h`.
///
/// Iterates on the smaller of `HᴴH` and `HHᴴ`; the other side follows as the
/// normalised image of the converged vector.
pub fn power_iteration_beamforming<T: Real>(
    h: &CMatrix<T>,
    opts: PowerIteration,
) -> Result<BeamformingPair<T>, ChannelError> {
    if h.rows() == 0 || h.cols() == 0 || !(h.frobenius_norm() > T::zero()) {
        return Err(ChannelError::ZeroChannel);
    }
    if h.cols() <= h.rows() {
        let (tx, _) = dominant_eigvec(&h.gram_right(), opts)?;
        let rx = normalized(&h.mul_vec(&tx)).ok_or(ChannelError::ZeroChannel)?;
        Ok(BeamformingPair {
            tx_weights: tx,
            rx_weights: rx,
        })
    } else {
        let (rx, _) = dominant_eigvec(&h.gram_left(), opts)?;
        let tx = normalized(&h.adjoint_mul_vec(&rx)).ok_or(ChannelError::ZeroChannel)?;
        Ok(BeamformingPair {
            tx_weights: tx,
            rx_weights: rx,
        })
    }
}

/// `|w_rxᴴ H w_tx|²`.
pub fn beamforming_gain<T: Real>(h: &CMatrix<T>, pair: &BeamformingPair<T>) -> Result<T, ChannelError> {
    if pair.tx_weights.len() != h.cols() {
        return Err(ChannelError::DimensionMismatch {
            what: "tx weights vs channel columns",
            expected: h.cols(),
            found: pair.tx_weights.len(),
        });
    }
    if pair.rx_weights.len() != h.rows() {
        return Err(ChannelError::DimensionMismatch {
            what: "rx weights vs channel rows",
            expected: h.rows(),
            found: pair.rx_weights.len(),
        });
    }
    Ok(dot_conj(&pair.rx_weights, &h.mul_vec(&pair.tx_weights)).norm_sqr())
}

/// A channel collapsed onto fixed beams: one complex coefficient per subpath,
/// so that `G(t,f) = |Σ g_kl(t,f)·a_kl|²` without rebuilding `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedChannel<T: Real = f64> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> ProjectedChannel<T> {
    pub fn new(spatial: &SpatialChannel<T>, pair: &BeamformingPair<T>) -> Result<Self, ChannelError> {
        if pair.tx_weights.len() != spatial.tx_antennas() || pair.rx_weights.len() != spatial.rx_antennas() {
            return Err(ChannelError::DimensionMismatch {
                what: "beam weights vs realization antennas",
                expected: spatial.tx_antennas(),
                found: pair.tx_weights.len(),
            });
        }
        let scale = spatial.array_scale();
        let coeffs = (0..spatial.num_subpaths())
            .map(|j| {
                let rx = dot_conj(&pair.rx_weights, &spatial.rx_spatial().column(j));
                let tx = dot_conj(&spatial.tx_spatial().column(j), &pair.tx_weights);
                rx * tx * scale
            })
            .collect();
        Ok(Self { coeffs })
    }

    /// Beamformed gain for the given subpath gains.
    pub fn gain(&self, subpath_gains: &[Complex<T>]) -> T {
        self.coeffs
            .iter()
            .zip(subpath_gains)
            .map(|(a, g)| *a * *g)
            .sum::<Complex<T>>()
            .norm_sqr()
    }
}
