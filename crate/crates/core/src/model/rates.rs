use serde::Serialize;

use super::system::OmSystem;
use crate::error::{Error, Result};

/// Anti-Stokes (Γ₊) and Stokes (Γ₋) scattering rates with the derived damping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterRates {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// Γ₊ − Γ₋
    pub gamma_opt: f64,
    /// Γ₊ − Γ₋ + Γ
    pub gamma_tot: f64,
}

/// Cavity density-of-states weights Γ±/g². They carry every closed-form ratio
/// and stay well defined at zero coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RateWeights {
    pub plus: f64,
    pub minus: f64,
}

impl RateWeights {
    pub fn of(sys: &OmSystem) -> Self {
        Self::new(sys.kappa(), sys.omega_eff(), sys.delta())
    }

    pub fn new(kappa: f64, omega: f64, delta: f64) -> Self {
        let k2 = kappa * kappa;
        RateWeights {
            plus: 4.0 * kappa / (k2 + 4.0 * (omega + delta).powi(2)),
            minus: 4.0 * kappa / (k2 + 4.0 * (omega - delta).powi(2)),
        }
    }

    pub fn net(&self) -> f64 {
        self.plus - self.minus
    }

    /// Errors unless anti-Stokes scattering dominates.
    pub fn require_cooling(&self, sys: &OmSystem) -> Result<()> {
        if self.net() > 0.0 {
            Ok(())
        } else {
            Err(Error::NotCooling { delta: sys.delta(), gamma_opt: sys.g().powi(2) * self.net() })
        }
    }
}

/// Weak-coupling scattering rates at the system's mechanical frequency.
pub fn scattering_rates(sys: &OmSystem) -> ScatterRates {
    let w = RateWeights::of(sys);
    let g2 = sys.g() * sys.g();
    let gamma_plus = g2 * w.plus;
    let gamma_minus = g2 * w.minus;
    let gamma_opt = gamma_plus - gamma_minus;
    ScatterRates { gamma_plus, gamma_minus, gamma_opt, gamma_tot: gamma_opt + sys.gamma_m() }
}

/// Critical squeezing r_c = ½·asinh(κ/2Ω).
pub fn critical_squeezing(sys: &OmSystem) -> f64 {
    0.5 * (sys.kappa() / (2.0 * sys.omega_eff())).asinh()
}

/// The pair of detunings (Δ₀⁺, Δ₀⁻), Δ₀⁺ > Δ₀⁻, at which squeezing `r ≥ r_c`
/// fully suppresses Stokes scattering.
pub fn bifurcated_detunings(sys: &OmSystem, r: f64) -> Result<(f64, f64)> {
    let omega = sys.omega_eff();
    let kappa = sys.kappa();
    let k2 = kappa * kappa;
    let mut disc = 4.0 * omega * omega * (2.0 * r).sinh().powi(2) - k2;
    if disc < 0.0 {
        // r = r_c lands here through rounding alone.
        if disc > -1e-12 * k2 {
            disc = 0.0;
        } else {
            return Err(Error::DiscriminantNegative { r, r_c: critical_squeezing(sys) });
        }
    }
    let centre = -omega * (2.0 * r).cosh();
    let half = 0.5 * disc.sqrt();
    Ok((centre + half, centre - half))
}

/// Squeezing phase θ₀ that minimizes the optical bath occupancy, in (−π, π].
pub fn optimal_phase(sys: &OmSystem) -> f64 {
    let (kappa, omega, delta) = (sys.kappa(), sys.omega_eff(), sys.delta());
    (-4.0 * delta * kappa).atan2(kappa * kappa + 4.0 * (omega * omega - delta * delta))
}
