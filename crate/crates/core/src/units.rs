//! Unit conversions at the boundary. Internally every rate is angular (rad/s).

use std::f64::consts::{LN_10, TAU};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;

pub fn hz_to_angular(f_hz: f64) -> f64 {
    TAU * f_hz
}

pub fn angular_to_hz(omega: f64) -> f64 {
    omega / TAU
}

/// Squeezing expressed in dB of variance, 10·log10(e^(-2r)). Negative means squeezed.
pub fn squeezing_db(r: f64) -> f64 {
    -20.0 * r / LN_10
}

/// Inverse of [`squeezing_db`]; accepts either sign convention of the magnitude.
pub fn r_from_db(db: f64) -> f64 {
    db.abs() * LN_10 / 20.0
}
