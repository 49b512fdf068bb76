//! Channel model: link state, pathloss, clustered MIMO fading and
//! beamforming.

mod beamforming;
mod fading;
mod linalg;
mod pool;
mod poolfile;
mod state;

use thiserror::Error;

pub use beamforming::{
    beamforming_gain, power_iteration_beamforming, BeamformingPair, PowerIteration, ProjectedChannel,
};
pub use fading::{
    assemble_channel, assemble_with_gains, small_scale_gain, ula_signature, SpatialChannel, Subpath,
    SIGNATURE_NORM_TOL,
};
pub use linalg::{dot_conj, norm, normalized, CMatrix};
pub use pool::{
    generate_realization_pool, update_large_scale, ChannelRealization, ClusterStats, RealizationPool,
};
pub use poolfile::{load_pool, read_pool, save_pool, write_pool};
pub use state::{
    doppler_from_speed, pathloss_db, select_from_probabilities, select_link_state, LinkState,
    LinkStateModel, PathlossParams, SPEED_OF_LIGHT,
};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("distance is not finite")]
    NonFiniteDistance,
    #[error("distance must be > 0")]
    NonPositiveDistance,
    #[error("pathloss parameters need beta > 0 and sigma >= 0")]
    InvalidPathloss,
    #[error("antenna counts must be >= 1")]
    ZeroAntennas,
    #[error("realization pool is empty")]
    EmptyPool,
    #[error("invalid cluster statistics: {0}")]
    InvalidStats(String),
    #[error("subpath power must be >= 0 and delay finite")]
    InvalidSubpath,
    #[error("dimension mismatch ({what}): expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("spatial signature column {column} has norm {norm}, expected 1")]
    NotUnitNorm { column: usize, norm: f64 },
    #[error("channel matrix is zero; no dominant direction")]
    ZeroChannel,
    #[error("pool file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
