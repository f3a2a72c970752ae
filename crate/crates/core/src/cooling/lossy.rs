use serde::Serialize;

use super::occupancy::{
    bath_occupancy_at, sideband_limit, sideband_limit_at_optimum, BathComponents, BathOccupancy, Branch,
};
use crate::error::Result;
use crate::model::drive::SqueezedDrive;
use crate::model::system::OmSystem;

/// Bath occupancy with internal cavity loss, plus its two analytic bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossyCavityBath {
    pub bath: BathOccupancy,
    /// (κ₀/κ)·n_m⁰(κ) at Δ₀: the occupancy left when the squeezed term is nulled.
    pub lower_bound: f64,
    /// n_m⁰(κ₀) at its own optimal detuning: the floor for any Gaussian drive.
    pub internal_floor: f64,
}

/// ñ = η·n_bath(κ) + (1 − η)·n_m⁰(κ) with η = κ_ext/κ; the internal port is vacuum.
pub fn bath_occupancy_lossy_cavity(sys: &OmSystem, drive: &SqueezedDrive) -> Result<LossyCavityBath> {
    let branch = Branch::of_drive(sys, drive)?;
    bath_occupancy_lossy_cavity_at(sys, drive.r(), drive.n_l(), branch)
}

/// [`bath_occupancy_lossy_cavity`] for (r, n_l) on an explicit branch.
pub fn bath_occupancy_lossy_cavity_at(sys: &OmSystem, r: f64, n_l: f64, branch: Branch) -> Result<LossyCavityBath> {
    let squeezed = bath_occupancy_at(sys, r, n_l, branch)?;
    let coherent = sideband_limit(sys)?;
    let eta = sys.eta();
    let c = squeezed.components.expect("closed-form occupancy carries components");
    let bath = BathOccupancy::from_components(BathComponents {
        pure_squeezing: eta * c.pure_squeezing,
        impurity: eta * c.impurity,
        internal_loss: (1.0 - eta) * coherent,
    });
    let omega = sys.omega_eff();
    Ok(LossyCavityBath {
        bath,
        lower_bound: (1.0 - eta) * sideband_limit_at_optimum(sys.kappa(), omega),
        internal_floor: sideband_limit_at_optimum(sys.kappa_0(), omega),
    })
}
