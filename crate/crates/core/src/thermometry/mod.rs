//! Sideband thermometry with squeezed-light drives.

pub mod effective;
pub mod fit;
pub mod io;
pub mod retrieve;

pub use effective::{effective_occupancies, effective_occupancies_given, modeled_occupancy, EffectiveOccupancies};
pub use fit::{fit_samples, fit_sideband, SidebandFit, LORENTZIAN_RESIDUAL_LIMIT, MIN_WINDOW_SAMPLES};
pub use io::{read_measured_spectrum, FrequencyUnit, MeasuredSpectrum};
pub use retrieve::{retrieve_state, Observation, Sideband, ThermometryResult, OVERCOUPLING_MIN};
