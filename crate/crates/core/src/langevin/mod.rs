//! Frequency-domain solution of the linearized Heisenberg–Langevin equations.
//!
//! Convention: X(t) = ∫ X[ω] e^{−iωt} dω/2π in the frame rotating with the
//! drive, so the anti-Stokes (upper) sideband of the reflected field sits at
//! δ = +Ω_tot.

pub mod bath;
pub mod heights;
pub mod occupancy;
pub(crate) mod quad;
pub mod response;
pub mod spectrum;

pub use bath::{bath_from_drive, BathSpec};
pub use heights::{sideband_heights, SidebandHeights, ASYMMETRY_LIMIT};
pub use occupancy::{bath_occupancy_numeric, phonon_occupancy_numeric};
pub use response::{check_stability, growth_rate, solve_response, Response};
pub use spectrum::{
    detected_spectrum, detection_efficiency, mechanical_spectrum, output_spectrum, FreqGrid, Normalization, Spectrum,
    SpectrumKind,
};
