//! Constant-velocity mobility in the plane.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityState {
    /// Metres.
    pub position: [f64; 2],
    /// Metres per second.
    pub velocity: [f64; 2],
}

impl MobilityState {
    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

/// `position(0) + velocity·t`; negative times are treated as 0.
pub fn advance_mobility(state: &MobilityState, t: f64) -> [f64; 2] {
    let t = t.max(0.0);
    [
        state.position[0] + state.velocity[0] * t,
        state.position[1] + state.velocity[1] * t,
    ]
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Earliest `t ≥ 0` at which the terminal is at least `range` metres from
/// `anchor`; `None` if it never gets there.
pub fn time_to_reach(state: &MobilityState, anchor: [f64; 2], range: f64) -> Option<f64> {
    let r = [state.position[0] - anchor[0], state.position[1] - anchor[1]];
    let v = state.velocity;
    let c = r[0] * r[0] + r[1] * r[1] - range * range;
    if c >= 0.0 {
        return Some(0.0);
    }
    let a = v[0] * v[0] + v[1] * v[1];
    if a == 0.0 {
        return None;
    }
    let b = 2.0 * (r[0] * v[0] + r[1] * v[1]);
    Some((-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a))
}
