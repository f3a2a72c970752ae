//! Sideband cooling of a cavity optomechanical system driven by squeezed light.
//!
//! All rates are angular frequencies in rad/s (or any consistent normalized
//! unit, typically Ω = 1). Red detuning is negative.

pub mod cooling;
pub mod error;
pub mod langevin;
pub mod model;
pub mod thermometry;
pub mod units;

pub use error::{Error, Result};
pub use model::*;
