use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::drive::{wrap_phase, SqueezedDrive};
use crate::model::rates::{optimal_phase, scattering_rates, RateWeights};
use crate::model::system::OmSystem;

/// Largest phase mismatch (rad) still treated as one of the two special phases.
pub const PHASE_TOLERANCE: f64 = 1e-9;

/// The two squeezing phases at which the sidebands stay Lorentzian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// θ = θ₀, the cooling phase.
    Theta0,
    /// θ = θ₀ − π, the heating phase.
    Theta0MinusPi,
}

impl Branch {
    /// +1 on the cooling branch, −1 on the heating branch.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Theta0 => 1.0,
            Branch::Theta0MinusPi => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Branch::Theta0 => Branch::Theta0MinusPi,
            Branch::Theta0MinusPi => Branch::Theta0,
        }
    }

    /// Squeezing phase of this branch for `sys`, wrapped to (−π, π].
    pub fn phase(self, sys: &OmSystem) -> f64 {
        match self {
            Branch::Theta0 => optimal_phase(sys),
            Branch::Theta0MinusPi => wrap_phase(optimal_phase(sys) - PI),
        }
    }

    /// Branch matching `theta`, if any.
    pub fn classify(sys: &OmSystem, theta: f64) -> Option<Self> {
        let d = wrap_phase(theta - optimal_phase(sys)).abs();
        if d <= PHASE_TOLERANCE {
            Some(Branch::Theta0)
        } else if PI - d <= PHASE_TOLERANCE {
            Some(Branch::Theta0MinusPi)
        } else {
            None
        }
    }

    /// Branch of a drive; phase-insensitive drives (r = 0) count as θ₀.
    pub fn of_drive(sys: &OmSystem, drive: &SqueezedDrive) -> Result<Self> {
        if drive.r() == 0.0 {
            return Ok(Branch::Theta0);
        }
        Branch::classify(sys, drive.theta()).ok_or(Error::GenericPhase { theta: drive.theta() })
    }
}

/// Additive breakdown of a bath occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BathComponents {
    pub pure_squeezing: f64,
    pub impurity: f64,
    pub internal_loss: f64,
}

impl BathComponents {
    pub fn sum(&self) -> f64 {
        self.pure_squeezing + self.impurity + self.internal_loss
    }
}

/// Effective optical-bath phonon occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BathOccupancy {
    pub n_bath: f64,
    pub components: Option<BathComponents>,
}

impl BathOccupancy {
    pub fn from_components(components: BathComponents) -> Self {
        BathOccupancy { n_bath: components.sum(), components: Some(components) }
    }

    pub fn total(n_bath: f64) -> Self {
        BathOccupancy { n_bath, components: None }
    }
}

/// Coherent-drive quantum limit n_m⁰ = Γ₋/Γ_opt.
pub fn sideband_limit(sys: &OmSystem) -> Result<f64> {
    let delta = sys.delta();
    if delta >= 0.0 {
        return Err(Error::NotCooling { delta, gamma_opt: scattering_rates(sys).gamma_opt });
    }
    let (kappa, omega) = (sys.kappa(), sys.omega_eff());
    Ok(-(kappa * kappa + 4.0 * (delta + omega).powi(2)) / (16.0 * delta * omega))
}

/// n_m⁰ at Δ₀ for linewidth `kappa`: ½√(1 + (κ/2Ω)²) − ½.
pub(crate) fn sideband_limit_at_optimum(kappa: f64, omega: f64) -> f64 {
    let x = kappa / (2.0 * omega);
    // ½(√(1+x²) − 1) without cancellation.
    0.5 * x * x / ((1.0 + x * x).sqrt() + 1.0)
}

fn terms(w: &RateWeights, r: f64, n_l: f64, s: f64) -> BathComponents {
    let net = w.net();
    let (sp, sm) = (w.plus.sqrt(), w.minus.sqrt());
    let pure = (sm * r.cosh() - s * sp * r.sinh()).powi(2) / net;
    let two_r = 2.0 * r;
    let impurity = n_l * ((w.plus + w.minus) * two_r.cosh() - 2.0 * s * sp * sm * two_r.sinh()) / net;
    BathComponents { pure_squeezing: pure, impurity, internal_loss: 0.0 }
}

fn check_drive(r: f64, n_l: f64) -> Result<()> {
    SqueezedDrive::new(r, n_l, 0.0).map(|_| ())
}

/// Bath occupancy for pure squeezing of strength `r` at θ = θ₀.
pub fn bath_occupancy_pure(sys: &OmSystem, r: f64) -> Result<BathOccupancy> {
    bath_occupancy_at(sys, r, 0.0, Branch::Theta0)
}

/// Bath occupancy for an impure squeezed drive on one of the special phases.
///
/// Any other phase has no closed form and yields [`Error::GenericPhase`].
pub fn bath_occupancy(sys: &OmSystem, drive: &SqueezedDrive) -> Result<BathOccupancy> {
    let branch = Branch::of_drive(sys, drive)?;
    bath_occupancy_at(sys, drive.r(), drive.n_l(), branch)
}

/// Bath occupancy for (r, n_l) on an explicit branch.
pub fn bath_occupancy_at(sys: &OmSystem, r: f64, n_l: f64, branch: Branch) -> Result<BathOccupancy> {
    check_drive(r, n_l)?;
    let w = RateWeights::of(sys);
    w.require_cooling(sys)?;
    Ok(BathOccupancy::from_components(terms(&w, r, n_l, branch.sign())))
}

/// Detailed-balance phonon occupancy n_m = (Γ·n_th + Γ_opt·n_bath)/(Γ + Γ_opt).
pub fn equilibrium_occupancy(sys: &OmSystem, n_bath: f64) -> Result<f64> {
    let rates = scattering_rates(sys);
    let gamma = sys.gamma_m();
    if rates.gamma_tot <= 0.0 {
        return Err(Error::Unstable { growth_rate: -0.5 * rates.gamma_tot });
    }
    Ok((gamma * sys.n_th() + rates.gamma_opt * n_bath) / rates.gamma_tot)
}
