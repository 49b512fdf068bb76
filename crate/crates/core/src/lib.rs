//! Discrete-event simulator for millimeter-wave cellular links: cluster
//! channel model with beamforming, TDD frame engine, MIESM error model,
//! CQI feedback and a round-robin MAC.
//!
//! Numeric types are generic over `f32`/`f64`; the aliases below fix one.

pub mod channel;
pub mod cli;
pub mod config;
pub mod mac;
pub mod phy;
pub mod scalar;
pub mod sim;

pub use scalar::Real;

pub type FrameConfigF64 = config::FrameConfig<f64>;
pub type FrameConfigF32 = config::FrameConfig<f32>;
pub type CMatrixF64 = channel::CMatrix<f64>;
pub type CMatrixF32 = channel::CMatrix<f32>;
pub type SpatialChannelF64 = channel::SpatialChannel<f64>;
pub type SpatialChannelF32 = channel::SpatialChannel<f32>;
pub type BeamformingPairF64 = channel::BeamformingPair<f64>;
pub type BeamformingPairF32 = channel::BeamformingPair<f32>;
pub type ProjectedChannelF64 = channel::ProjectedChannel<f64>;
pub type ProjectedChannelF32 = channel::ProjectedChannel<f32>;
pub type RealizationPoolF64 = channel::RealizationPool<f64>;
pub type RealizationPoolF32 = channel::RealizationPool<f32>;
pub type PathlossParamsF64 = channel::PathlossParams<f64>;
pub type PathlossParamsF32 = channel::PathlossParams<f32>;
pub type LinkPowerF64 = phy::LinkPower<f64>;
pub type LinkPowerF32 = phy::LinkPower<f32>;
pub type TransportBlockF64 = phy::TransportBlock<f64>;
pub type TransportBlockF32 = phy::TransportBlock<f32>;
