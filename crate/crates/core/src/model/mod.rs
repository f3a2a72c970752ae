//! Device and drive types plus every algebraic single-point quantity.

pub mod drive;
pub mod rates;
pub mod system;

pub use drive::{drive_from_loss, lossy_variance, quadrature_variance, wrap_phase, SqueezedDrive};
pub use rates::{bifurcated_detunings, critical_squeezing, optimal_phase, scattering_rates, ScatterRates};
pub use system::{optical_spring, optimal_detuning, OmParams, OmSystem, Spring};
