use serde::Serialize;

use super::bath::{bath_from_drive, BathSpec};
use super::response::check_stability;
use super::spectrum::output_photon_density;
use crate::error::{Error, Result};
use crate::model::drive::SqueezedDrive;
use crate::model::rates::RateWeights;
use crate::model::system::{optical_spring, OmSystem};

/// Mirror asymmetry above which a sideband is reported as not Lorentzian.
pub const ASYMMETRY_LIMIT: f64 = 1e-2;
/// Distance, in linewidths, of the two points bracketing each sideband floor.
const FLOOR_OFFSET: f64 = 30.0;

/// Detected heterodyne sideband heights at δ = ±Ω_tot relative to their local floors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandHeights {
    pub upper: f64,
    pub lower: f64,
    pub floor_upper: f64,
    pub floor_lower: f64,
    /// Spring-shifted frequency at which the sidebands were read.
    pub omega_tot: f64,
    /// Sideband linewidth Γ_tot at Ω_tot.
    pub gamma_tot: f64,
    /// Largest mirror residual |S(c+x) − S(c−x)| relative to |height| plus a
    /// tenth of the height one quantum of effective occupancy would produce.
    pub asymmetry: f64,
}

impl SidebandHeights {
    pub fn floor(&self) -> f64 {
        0.5 * (self.floor_upper + self.floor_lower)
    }
}

struct Read {
    height: f64,
    floor: f64,
    asymmetry: f64,
}

fn read_sideband(s: &impl Fn(f64) -> f64, centre: f64, width: f64, quantum: f64) -> Read {
    let x = FLOOR_OFFSET * width;
    let peak = s(centre);
    let raw = peak - 0.5 * (s(centre + x) + s(centre - x));
    // Lorentzian tail still present at ±x.
    let hw2 = 0.25 * width * width;
    let tail = hw2 / (x * x + hw2);
    let height = raw / (1.0 - tail);
    let floor = peak - height;
    let scale = height.abs() + 0.1 * quantum.abs();
    let asymmetry = [0.5, 1.0, 2.0]
        .iter()
        .map(|k| (s(centre + k * width) - s(centre - k * width)).abs() / scale)
        .fold(0.0, f64::max);
    Read { height, floor, asymmetry }
}

pub(crate) fn heights_from_bath(sys: &OmSystem, bath: &BathSpec, eta_det: f64) -> Result<SidebandHeights> {
    check_stability(sys)?;
    let omega_tot = optical_spring(sys)?;
    let w = RateWeights::new(sys.kappa(), omega_tot, sys.delta());
    let gamma_tot = sys.g().powi(2) * w.net() + sys.gamma_m();
    let s = |d: f64| 1.0 + eta_det * output_photon_density(sys, bath, d);
    let g2 = sys.g().powi(2);
    let up = read_sideband(&s, omega_tot, gamma_tot, 4.0 * eta_det * g2 * w.plus / gamma_tot);
    let lo = read_sideband(&s, -omega_tot, gamma_tot, 4.0 * eta_det * g2 * w.minus / gamma_tot);
    Ok(SidebandHeights {
        upper: up.height,
        lower: lo.height,
        floor_upper: up.floor,
        floor_lower: lo.floor,
        omega_tot,
        gamma_tot,
        asymmetry: up.asymmetry.max(lo.asymmetry),
    })
}

/// Reads both mechanical sidebands off the detected heterodyne spectrum.
///
/// The height/occupancy proportionality assumes a strongly overcoupled cavity
/// and Γ_tot ≪ κ. Off the two special phases the lines turn Fano-like and the
/// call fails with [`Error::NotLorentzian`].
pub fn sideband_heights(sys: &OmSystem, drive: &SqueezedDrive, eta_det: f64) -> Result<SidebandHeights> {
    if !(eta_det > 0.0 && eta_det <= 1.0) {
        return Err(Error::invalid("eta_det", format!("must lie in (0, 1], got {eta_det}")));
    }
    let bath = bath_from_drive(drive, sys.n_th())?;
    let h = heights_from_bath(sys, &bath, eta_det)?;
    if h.asymmetry > ASYMMETRY_LIMIT {
        return Err(Error::NotLorentzian { asymmetry: h.asymmetry });
    }
    Ok(h)
}
