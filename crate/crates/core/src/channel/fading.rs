//! Cluster/subpath channel: spatial signatures, small-scale fading and the
//! assembled MIMO channel matrix.

use num_complex::Complex;

use super::linalg::{norm, CMatrix};
use super::ChannelError;
use crate::scalar::Real;

/// Unit-norm tolerance for spatial-signature columns.
pub const SIGNATURE_NORM_TOL: f64 = 1e-9;

/// Parameters of one subpath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subpath<T: Real = f64> {
    /// Linear power share.
    pub power: T,
    /// Angle of arrival relative to the direction of motion, radians.
    pub aoa_rel_motion: T,
    /// Excess delay, seconds.
    pub delay: T,
}

/// `sqrt(P)·exp(i·(2π f_d cos(ω) t − 2π τ f))`.
#[inline]
pub fn small_scale_gain<T: Real>(t: T, f: T, subpath: &Subpath<T>, doppler_max: T) -> Complex<T> {
    let two_pi = T::TAU();
    let phase = two_pi * doppler_max * subpath.aoa_rel_motion.cos() * t - two_pi * subpath.delay * f;
    Complex::from_polar(subpath.power.sqrt(), phase)
}

/// Uniform-linear-array response `(1/√N)·exp(−iπ n sin θ)`, half-wavelength spacing.
pub fn ula_signature<T: Real>(antennas: usize, theta: T) -> Vec<Complex<T>> {
    let scale = T::one() / T::from_count(antennas).sqrt();
    let s = theta.sin();
    (0..antennas)
        .map(|n| Complex::from_polar(scale, -T::PI() * T::from_count(n) * s))
        .collect()
}

/// One pool entry: the spatial signatures and subpath parameters of a link.
///
/// Column `j` of both spatial matrices belongs to subpath `j`; subpaths are
/// stored cluster by cluster, with `cluster_sizes` giving each `L_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialChannel<T: Real = f64> {
    tx_spatial: CMatrix<T>,
    rx_spatial: CMatrix<T>,
    subpaths: Vec<Subpath<T>>,
    cluster_sizes: Vec<usize>,
}

impl<T: Real> SpatialChannel<T> {
    pub fn new(
        tx_spatial: CMatrix<T>,
        rx_spatial: CMatrix<T>,
        subpaths: Vec<Subpath<T>>,
        cluster_sizes: Vec<usize>,
    ) -> Result<Self, ChannelError> {
        if tx_spatial.rows() == 0 || rx_spatial.rows() == 0 {
            return Err(ChannelError::ZeroAntennas);
        }
        let n = subpaths.len();
        if tx_spatial.cols() != n || rx_spatial.cols() != n {
            return Err(ChannelError::DimensionMismatch {
                what: "spatial matrix columns vs subpath count",
                expected: n,
                found: if tx_spatial.cols() != n { tx_spatial.cols() } else { rx_spatial.cols() },
            });
        }
        if cluster_sizes.iter().sum::<usize>() != n || cluster_sizes.contains(&0) {
            return Err(ChannelError::DimensionMismatch {
                what: "sum of cluster sizes vs subpath count",
                expected: n,
                found: cluster_sizes.iter().sum(),
            });
        }
        if subpaths.iter().any(|p| !(p.power >= T::zero()) || !p.delay.is_finite()) {
            return Err(ChannelError::InvalidSubpath);
        }
        for m in [&tx_spatial, &rx_spatial] {
            for j in 0..n {
                let nrm = norm(&m.column(j)).as_f64();
                if (nrm - 1.0).abs() > SIGNATURE_NORM_TOL {
                    return Err(ChannelError::NotUnitNorm { column: j, norm: nrm });
                }
            }
        }
        Ok(Self {
            tx_spatial,
            rx_spatial,
            subpaths,
            cluster_sizes,
        })
    }

    pub fn tx_antennas(&self) -> usize {
        self.tx_spatial.rows()
    }

    pub fn rx_antennas(&self) -> usize {
        self.rx_spatial.rows()
    }

    pub fn num_subpaths(&self) -> usize {
        self.subpaths.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_sizes.len()
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }

    pub fn subpaths(&self) -> &[Subpath<T>] {
        &self.subpaths
    }

    pub fn tx_spatial(&self) -> &CMatrix<T> {
        &self.tx_spatial
    }

    pub fn rx_spatial(&self) -> &CMatrix<T> {
        &self.rx_spatial
    }

    /// Array gain normalisation `√(N_tx·N_rx)` applied to the channel matrix.
    pub fn array_scale(&self) -> T {
        T::from_count(self.tx_antennas() * self.rx_antennas()).sqrt()
    }

    /// Small-scale gains of every subpath at `(t, f)`.
    pub fn subpath_gains(&self, t: T, f: T, doppler_max: T) -> Vec<Complex<T>> {
        self.subpaths
            .iter()
            .map(|p| small_scale_gain(t, f, p, doppler_max))
            .collect()
    }
}

/// `H(t,f) = √(N_tx·N_rx) Σ_k Σ_l g_kl(t,f) u_rx,kl u_tx,klᴴ` (rx × tx).
pub fn assemble_channel<T: Real>(spatial: &SpatialChannel<T>, t: T, f: T, doppler_max: T) -> CMatrix<T> {
    let gains = spatial.subpath_gains(t, f, doppler_max);
    assemble_with_gains(spatial, &gains)
}

/// Channel matrix for explicitly supplied subpath gains.
pub fn assemble_with_gains<T: Real>(spatial: &SpatialChannel<T>, gains: &[Complex<T>]) -> CMatrix<T> {
    let (nr, nt) = (spatial.rx_antennas(), spatial.tx_antennas());
    let scale = spatial.array_scale();
    let mut h = CMatrix::zeros(nr, nt);
    for (j, g) in gains.iter().enumerate() {
        let g = *g * scale;
        let u_tx: Vec<_> = (0..nt).map(|c| spatial.tx_spatial.get(c, j).conj()).collect();
        for r in 0..nr {
            let a = g * spatial.rx_spatial.get(r, j);
            for (c, ut) in u_tx.iter().enumerate() {
                h.add_at(r, c, a * *ut);
            }
        }
    }
    h
}
