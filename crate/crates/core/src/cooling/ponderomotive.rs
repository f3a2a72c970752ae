use crate::error::{Error, Result};
use crate::model::rates::RateWeights;
use crate::model::system::OmSystem;

/// Saturated ponderomotive squeezing r_OM = asinh(2√(Γ₋Γ₊)/Γ_opt) of the
/// reflected field for a red-detuned coherent drive.
///
/// Valid once Γ_opt dominates the thermal decoherence Γ·n_th (or Γ at zero
/// temperature); that regime is the caller's responsibility.
pub fn pond_squeezing(sys: &OmSystem) -> Result<f64> {
    let w = RateWeights::of(sys);
    w.require_cooling(sys)?;
    Ok((2.0 * (w.plus * w.minus).sqrt() / w.net()).asinh())
}

/// r_OM as a function of the normalized detuning Δ̃ = Δ/Δ₀ and κ/Ω.
pub fn pond_squeezing_normalized(delta_tilde: f64, kappa_over_omega: f64) -> Result<f64> {
    if !(delta_tilde.is_finite() && delta_tilde > 0.0) {
        return Err(Error::invalid("delta_tilde", format!("must be finite and > 0, got {delta_tilde}")));
    }
    if !(kappa_over_omega.is_finite() && kappa_over_omega >= 0.0) {
        return Err(Error::invalid("kappa_over_omega", "must be finite and >= 0"));
    }
    let sum = delta_tilde + delta_tilde.recip();
    let diff = delta_tilde - delta_tilde.recip();
    let k = kappa_over_omega / 2.0;
    Ok((0.5 * (sum * sum * k * k + diff * diff).sqrt()).asinh())
}

/// Zero-temperature coherent-drive occupancy at Δ₀ to second order in κ/Ω and g/Ω:
/// (κ/4Ω)² + ½(g/Ω)².
pub fn strong_coupling_estimate(sys: &OmSystem) -> f64 {
    let omega = sys.omega_eff();
    (sys.kappa() / (4.0 * omega)).powi(2) + 0.5 * (sys.g() / omega).powi(2)
}
