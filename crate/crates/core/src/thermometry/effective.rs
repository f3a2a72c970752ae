use serde::Serialize;

use crate::cooling::lossy::bath_occupancy_lossy_cavity_at;
use crate::cooling::occupancy::{equilibrium_occupancy, Branch};
use crate::error::{Error, Result};
use crate::model::drive::SqueezedDrive;
use crate::model::rates::RateWeights;
use crate::model::system::OmSystem;

/// Occupancies a naive sideband-thermometry reading would report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveOccupancies {
    pub upper: f64,
    pub lower: f64,
    /// Actual phonon occupancy behind the two readings.
    pub n_m: f64,
}

/// Steady-state n_m for (r, n_l) on `branch`, from the closed-form bath and detailed balance.
pub fn modeled_occupancy(sys: &OmSystem, r: f64, n_l: f64, branch: Branch) -> Result<f64> {
    let bath = bath_occupancy_lossy_cavity_at(sys, r, n_l, branch)?;
    equilibrium_occupancy(sys, bath.bath.n_bath)
}

/// n_eff± for a given n_m:
/// n_eff⁺ = n_m − n_l cosh 2r − sinh² r + s·t(½ + n_l) sinh 2r,
/// n_eff⁻ = n_m + n_l cosh 2r + sinh² r − (s/t)(½ + n_l) sinh 2r,
/// with t = √(Γ₋/Γ₊) and s = ±1 on the θ₀ / θ₀ − π branch.
pub fn effective_occupancies_given(
    sys: &OmSystem,
    r: f64,
    n_l: f64,
    n_m: f64,
    branch: Branch,
) -> Result<EffectiveOccupancies> {
    SqueezedDrive::new(r, n_l, 0.0)?;
    let w = RateWeights::of(sys);
    w.require_cooling(sys)?;
    if !n_m.is_finite() {
        return Err(Error::invalid("n_m", "must be finite"));
    }
    let t = (w.minus / w.plus).sqrt();
    let s = branch.sign();
    let two_r = 2.0 * r;
    let a = n_l * two_r.cosh() + r.sinh().powi(2);
    let b = (0.5 + n_l) * two_r.sinh();
    Ok(EffectiveOccupancies { upper: n_m - a + s * t * b, lower: n_m + a - s * b / t, n_m })
}

/// n_eff± with n_m taken from the closed-form steady state of the drive on `branch`.
pub fn effective_occupancies(sys: &OmSystem, drive: &SqueezedDrive, branch: Branch) -> Result<EffectiveOccupancies> {
    let n_m = modeled_occupancy(sys, drive.r(), drive.n_l(), branch)?;
    effective_occupancies_given(sys, drive.r(), drive.n_l(), n_m, branch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langevin::heights::sideband_heights;
    use crate::model::rates::critical_squeezing;
    use crate::model::system::OmParams;
    use proptest::prelude::*;

    fn sys(kappa: f64, gamma: f64, n_th: f64) -> OmSystem {
        let p = OmParams { gamma_m: gamma, n_th, ..OmParams::normalized(kappa, -1.0, 0.01) };
        OmSystem::new(p).unwrap().at_optimal_detuning().unwrap()
    }

    #[test]
    fn coherent_drive_reads_true_occupancy() {
        let s = sys(2.7, 1e-5, 3.0);
        let e = effective_occupancies(&s, &SqueezedDrive::coherent(), Branch::Theta0).unwrap();
        assert_eq!(e.upper, e.n_m);
        assert_eq!(e.lower, e.n_m);
    }

    #[test]
    fn critical_nulling_values() {
        let s = sys(2.7, 1e-9, 0.0);
        let rc = critical_squeezing(&s);
        for n_l in [0.0, 0.5, 2.0] {
            let e = effective_occupancies_given(&s, rc, n_l, n_l, Branch::Theta0).unwrap();
            assert!(e.upper.abs() < 1e-10, "{}", e.upper);
            assert!((e.lower + 1.0).abs() < 1e-10, "{}", e.lower);
        }
    }

    #[test]
    fn reference_point_matches_spectral_heights() {
        // Oracle: sideband heights of the Langevin spectra mapped through
        // h₊ = 4Γ₊n_eff⁺/Γ_tot and h₋ = 4Γ₋(n_eff⁻ + 1)/Γ_tot.
        let base = sys(2.7, 1e-5, 0.0);
        let target = 0.175;
        let rates = crate::model::rates::scattering_rates(&base);
        let n_bath = bath_occupancy_lossy_cavity_at(&base, 0.3, 0.0711, Branch::Theta0).unwrap().bath.n_bath;
        let n_th = (target * rates.gamma_tot - rates.gamma_opt * n_bath) / base.gamma_m();
        let s = base.with_thermal(base.gamma_m(), n_th).unwrap();
        for branch in [Branch::Theta0, Branch::Theta0MinusPi] {
            let drive = SqueezedDrive::new(0.3, 0.0711, branch.phase(&s)).unwrap();
            let e = effective_occupancies(&s, &drive, branch).unwrap();
            if branch == Branch::Theta0 {
                assert!((e.n_m - target).abs() < 1e-12);
            }
            let h = sideband_heights(&s, &drive, 1.0).unwrap();
            let w = RateWeights::new(s.kappa(), h.omega_tot, s.delta());
            let g2 = s.g().powi(2);
            let up = h.upper * h.gamma_tot / (4.0 * g2 * w.plus);
            let lo = h.lower * h.gamma_tot / (4.0 * g2 * w.minus) - 1.0;
            assert!((up - e.upper).abs() < 2e-3 * (1.0 + e.upper.abs()), "{branch:?} {up} vs {}", e.upper);
            assert!((lo - e.lower).abs() < 2e-3 * (1.0 + e.lower.abs()), "{branch:?} {lo} vs {}", e.lower);
        }
    }

    proptest! {
        #[test]
        fn branch_swap_flips_correlation_terms(r in 0.0f64..1.5, n_l in 0.0f64..2.0, n_m in 0.0f64..5.0) {
            let s = sys(2.7, 1e-5, 0.0);
            let a = effective_occupancies_given(&s, r, n_l, n_m, Branch::Theta0).unwrap();
            let b = effective_occupancies_given(&s, r, n_l, n_m, Branch::Theta0MinusPi).unwrap();
            let w = RateWeights::of(&s);
            let t = (w.minus / w.plus).sqrt();
            let corr = (0.5 + n_l) * (2.0 * r).sinh();
            prop_assert!((a.upper - b.upper - 2.0 * t * corr).abs() <= 1e-12 * (1.0 + corr));
            prop_assert!((b.lower - a.lower - 2.0 * corr / t).abs() <= 1e-12 * (1.0 + corr / t));
            // The uncorrelated part is branch independent.
            prop_assert!(((a.upper + b.upper) - (b.upper + a.upper)).abs() == 0.0);
            prop_assert!((a.upper + b.upper - 2.0 * (n_m - n_l * (2.0 * r).cosh() - r.sinh().powi(2))).abs() <= 1e-12 * (1.0 + n_m + corr));
        }
    }
}
