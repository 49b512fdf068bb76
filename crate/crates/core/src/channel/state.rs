//! Link-state classification and large-scale pathloss.

use serde::{Deserialize, Serialize};

use super::ChannelError;
use crate::scalar::Real;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkState {
    Los,
    Nlos,
    Outage,
}

impl LinkState {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkState::Los => "LOS",
            LinkState::Nlos => "NLOS",
            LinkState::Outage => "OUTAGE",
        }
    }
}

/// Distance-dependent probabilities of the three link states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkStateModel<T: Real = f64> {
    /// `P_LoS(d) = exp(-los_decay·d)`; the rest of the mass is NLOS with
    /// share `min(1, exp(-outage_decay·d + outage_offset))`, outage otherwise.
    Exponential {
        los_decay: T,
        outage_decay: T,
        outage_offset: T,
    },
    /// Fixed probabilities regardless of distance.
    Constant { los: T, nlos: T },
}

impl<T: Real> Default for LinkStateModel<T> {
    fn default() -> Self {
        LinkStateModel::Exponential {
            los_decay: T::lit(1.0 / 67.1),
            outage_decay: T::lit(1.0 / 30.0),
            outage_offset: T::lit(5.2),
        }
    }
}

impl<T: Real> LinkStateModel<T> {
    /// `(P_LoS, P_NLoS)` at distance `d`; outage is `1 - P_LoS - P_NLoS`.
    pub fn probabilities(&self, d: T) -> (T, T) {
        match *self {
            LinkStateModel::Exponential {
                los_decay,
                outage_decay,
                outage_offset,
            } => {
                let p_los = (-los_decay * d).exp().min(T::one());
                let share = (-outage_decay * d + outage_offset).exp().min(T::one());
                (p_los, (T::one() - p_los) * share)
            }
            LinkStateModel::Constant { los, nlos } => (los, nlos),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            LinkStateModel::Exponential {
                los_decay,
                outage_decay,
                outage_offset,
            } => {
                if !(los_decay >= T::zero() && outage_decay >= T::zero() && outage_offset.is_finite())
                {
                    return Err("decay rates must be >= 0 and offset finite".into());
                }
            }
            LinkStateModel::Constant { los, nlos } => {
                let unit = |p: T| p >= T::zero() && p <= T::one();
                if !(unit(los) && unit(nlos) && los + nlos <= T::one()) {
                    return Err("probabilities must lie in [0,1] and sum to at most 1".into());
                }
            }
        }
        Ok(())
    }
}

/// Three-branch state rule against a uniform reference draw.
pub fn select_from_probabilities<T: Real>(p_los: T, p_nlos: T, draw: T) -> LinkState {
    if draw <= p_los {
        LinkState::Los
    } else if draw <= p_los + p_nlos {
        LinkState::Nlos
    } else {
        LinkState::Outage
    }
}

pub fn select_link_state<T: Real>(
    distance: T,
    model: &LinkStateModel<T>,
    uniform_draw: T,
) -> Result<LinkState, ChannelError> {
    if !distance.is_finite() {
        return Err(ChannelError::NonFiniteDistance);
    }
    let (p_los, p_nlos) = model.probabilities(distance);
    Ok(select_from_probabilities(p_los, p_nlos, uniform_draw))
}

/// Intercept, exponent factor and shadowing deviation for one link state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathlossParams<T: Real = f64> {
    pub alpha: T,
    pub beta: T,
    pub sigma: T,
}

impl<T: Real> PathlossParams<T> {
    pub fn new(alpha: T, beta: T, sigma: T) -> Result<Self, ChannelError> {
        let p = Self { alpha, beta, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn los() -> Self {
        Self {
            alpha: T::lit(61.4),
            beta: T::lit(2.0),
            sigma: T::lit(5.8),
        }
    }

    pub fn nlos() -> Self {
        Self {
            alpha: T::lit(72.0),
            beta: T::lit(2.92),
            sigma: T::lit(8.7),
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.beta > T::zero() && self.sigma >= T::zero() && self.alpha.is_finite()) {
            return Err(ChannelError::InvalidPathloss);
        }
        Ok(())
    }
}

/// `α + β·10·log10(d) + ξ` in dB.
pub fn pathloss_db<T: Real>(
    distance: T,
    params: &PathlossParams<T>,
    shadowing_db: T,
) -> Result<T, ChannelError> {
    if !distance.is_finite() {
        return Err(ChannelError::NonFiniteDistance);
    }
    if distance <= T::zero() {
        return Err(ChannelError::NonPositiveDistance);
    }
    Ok(params.alpha + params.beta * T::lit(10.0) * distance.log10() + shadowing_db)
}

/// Maximum Doppler shift for a terminal moving at `speed` m/s.
pub fn doppler_from_speed<T: Real>(speed: T, center_freq: T) -> T {
    speed * center_freq / T::lit(SPEED_OF_LIGHT)
}
