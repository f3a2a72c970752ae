use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian drive noise: a thermal state of occupancy `n_l` subjected to an
/// ideal squeezing operation of strength `r` along phase `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedDrive {
    r: f64,
    n_l: f64,
    theta: f64,
}

impl SqueezedDrive {
    pub fn new(r: f64, n_l: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid("r", format!("must be finite and >= 0, got {r}")));
        }
        if !(n_l.is_finite() && n_l >= 0.0) {
            return Err(Error::invalid("n_l", format!("must be finite and >= 0, got {n_l}")));
        }
        if !theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite"));
        }
        Ok(SqueezedDrive { r, n_l, theta: wrap_phase(theta) })
    }

    pub fn coherent() -> Self {
        SqueezedDrive { r: 0.0, n_l: 0.0, theta: 0.0 }
    }

    /// Pure squeezed state of strength `r_in` after a channel of transmittance `eta_in`.
    pub fn from_loss(r_in: f64, eta_in: f64, theta: f64) -> Result<Self> {
        let (r, n_l) = drive_from_loss(r_in, eta_in)?;
        SqueezedDrive::new(r, n_l, theta)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn n_l(&self) -> f64 {
        self.n_l
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        SqueezedDrive { theta: wrap_phase(theta), ..*self }
    }

    pub fn is_coherent(&self) -> bool {
        self.r == 0.0 && self.n_l == 0.0
    }
}

/// Maps an angle onto (−π, π].
pub fn wrap_phase(theta: f64) -> f64 {
    let y = theta.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Effective (r, n_l) of a pure squeezed state (`r_in`) sent through a loss
/// channel of transmittance `eta_in` to vacuum.
pub fn drive_from_loss(r_in: f64, eta_in: f64) -> Result<(f64, f64)> {
    if !(r_in.is_finite() && r_in >= 0.0) {
        return Err(Error::invalid("r_in", format!("must be finite and >= 0, got {r_in}")));
    }
    if !(0.0..=1.0).contains(&eta_in) {
        return Err(Error::invalid("eta_in", format!("must lie in [0, 1], got {eta_in}")));
    }
    let loss = 1.0 - eta_in;
    let stretched = loss + eta_in * (2.0 * r_in).exp();
    let squeezed = loss + eta_in * (-2.0 * r_in).exp();
    let r = 0.25 * (stretched / squeezed).ln();
    // stretched·squeezed = 1 + 4η(1−η)sinh²r_in; written this way n_l keeps full
    // precision at small r_in and is exactly zero for η ∈ {0, 1}.
    let x = 4.0 * eta_in * loss * r_in.sinh().powi(2);
    let n_l = x / (2.0 * ((1.0 + x).sqrt() + 1.0));
    Ok((r, n_l))
}

/// Amplitude-quadrature variance ⟨(ΔX)²⟩ with X = (a + a†)/2.
pub fn quadrature_variance(drive: &SqueezedDrive) -> f64 {
    let two_r = 2.0 * drive.r;
    (1.0 + 2.0 * drive.n_l) * (two_r.cosh() - drive.theta.cos() * two_r.sinh()) / 4.0
}

/// Amplitude-quadrature variance of a pure squeezed state after loss.
pub fn lossy_variance(r_in: f64, eta_in: f64, theta: f64) -> f64 {
    let two_r = 2.0 * r_in;
    (1.0 - eta_in + eta_in * (two_r.cosh() - theta.cos() * two_r.sinh())) / 4.0
}
