use super::bath::bath_from_drive;
use super::quad::integrate_real_line;
use super::response::check_stability;
use super::spectrum::mechanical_density;
use crate::error::{Error, Result};
use crate::model::drive::SqueezedDrive;
use crate::model::rates::scattering_rates;
use crate::model::system::{optical_spring, OmSystem};

/// Relative accuracy targeted by the occupancy integral.
pub const OCCUPANCY_REL_TOL: f64 = 1e-6;
const MAX_INTERVALS: usize = 20_000;

fn breakpoints(sys: &OmSystem) -> Vec<f64> {
    let omega_tot = optical_spring(sys).unwrap_or(sys.omega_m());
    let rates = scattering_rates(sys);
    let centres = [omega_tot, -omega_tot, sys.omega_m(), -sys.omega_m(), sys.delta(), -sys.delta(), 0.0];
    let widths = [rates.gamma_tot.abs(), sys.gamma_m(), sys.kappa(), sys.g()];
    let mut pts = Vec::with_capacity(centres.len() * (1 + 4 * widths.len()));
    for c in centres {
        pts.push(c);
        for w in widths.into_iter().filter(|w| *w > 0.0) {
            for k in [1.0, 10.0] {
                pts.push(c - k * w);
                pts.push(c + k * w);
            }
        }
    }
    pts
}

/// Steady-state phonon occupancy ⟨b†b⟩ = ∫ ⟨b†b⟩(ω) dω/2π from the full
/// linearized model.
pub fn phonon_occupancy_numeric(sys: &OmSystem, drive: &SqueezedDrive) -> Result<f64> {
    check_stability(sys)?;
    let bath = bath_from_drive(drive, sys.n_th())?;
    let scale = sys.omega_m().max(sys.kappa());
    let f = |w: f64| mechanical_density(sys, &bath, w);
    match integrate_real_line(f, &breakpoints(sys), scale, OCCUPANCY_REL_TOL, 0.0, MAX_INTERVALS) {
        Ok(q) => Ok(q.value / std::f64::consts::TAU),
        Err(q) => Err(Error::NonConvergent {
            what: "phonon occupancy integral",
            estimate: q.value / std::f64::consts::TAU,
            error: q.error / std::f64::consts::TAU,
        }),
    }
}

/// Optical-bath occupancy seen by the mechanics, extracted from the numeric
/// occupancy at zero mechanical temperature: ñ = n_m·(Γ + Γ_opt)/Γ_opt.
pub fn bath_occupancy_numeric(sys: &OmSystem, drive: &SqueezedDrive) -> Result<f64> {
    let cold = sys.with_thermal(sys.gamma_m(), 0.0)?;
    let rates = scattering_rates(&cold);
    if rates.gamma_opt <= 0.0 {
        return Err(Error::NotCooling { delta: sys.delta(), gamma_opt: rates.gamma_opt });
    }
    Ok(phonon_occupancy_numeric(&cold, drive)? * rates.gamma_tot / rates.gamma_opt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooling::occupancy::{bath_occupancy, equilibrium_occupancy, Branch};
    use crate::cooling::ponderomotive::strong_coupling_estimate;
    use crate::langevin::bath::BathSpec;
    use crate::model::system::OmParams;
    use nalgebra::{DMatrix, DVector, Matrix4};
    use num_complex::Complex64;

    /// Oracle: steady-state second moments from the Lyapunov equation
    /// A₀Q + QA₀† = B·E·B† solved as a 16×16 Kronecker system; returns ⟨b†b⟩.
    fn lyapunov_occupancy(sys: &OmSystem, bath: &BathSpec) -> f64 {
        let i = Complex64::new(0.0, 1.0);
        let (k2, g2, d, om) = (sys.kappa() / 2.0, sys.gamma_m() / 2.0, sys.delta(), sys.omega_m());
        let g = Complex64::new(sys.g(), 0.0);
        let z = Complex64::new(0.0, 0.0);
        #[rustfmt::skip]
        let a0 = Matrix4::new(
            k2 - i * d, z, -i * g, -i * g,
            z, k2 + i * d, i * g, i * g,
            -i * g, -i * g, g2 + i * om, z,
            i * g, i * g, z, g2 - i * om,
        );
        let mut b = DMatrix::<Complex64>::zeros(4, 6);
        b[(0, 0)] = sys.kappa_ext().sqrt().into();
        b[(1, 1)] = sys.kappa_ext().sqrt().into();
        b[(0, 2)] = sys.kappa_0().sqrt().into();
        b[(1, 3)] = sys.kappa_0().sqrt().into();
        b[(2, 4)] = sys.gamma_m().sqrt().into();
        b[(3, 5)] = sys.gamma_m().sqrt().into();
        let e = DMatrix::from_fn(6, 6, |r, c| bath.antinormal()[(r, c)]);
        let rhs = &b * e * b.adjoint();
        let mut k = DMatrix::<Complex64>::zeros(16, 16);
        for r in 0..4 {
            for c in 0..4 {
                for m in 0..4 {
                    k[(r * 4 + c, m * 4 + c)] += a0[(r, m)];
                    k[(r * 4 + c, r * 4 + m)] += a0[(c, m)].conj();
                }
            }
        }
        let v = DVector::from_fn(16, |idx, _| rhs[(idx / 4, idx % 4)]);
        let q = k.lu().solve(&v).unwrap();
        q[2 * 4 + 2].re - 1.0
    }

    fn norm(kappa: f64, g: f64, gamma: f64, n_th: f64) -> OmSystem {
        let p = OmParams { gamma_m: gamma, n_th, ..OmParams::normalized(kappa, -1.0, g) };
        OmSystem::new(p).unwrap().at_optimal_detuning().unwrap()
    }

    #[test]
    fn bare_mode_holds_thermal_occupancy() {
        let sys = norm(2.7, 0.0, 1e-3, 3.5);
        let n = phonon_occupancy_numeric(&sys, &SqueezedDrive::coherent()).unwrap();
        assert!((n - 3.5).abs() < 1e-5);
    }

    #[test]
    fn matches_lyapunov_oracle() {
        for (kappa, g, r, n_l) in [(2.7, 0.01, 0.3, 0.07), (0.1, 0.05, 0.0, 0.0), (1.0, 0.2, 0.5, 0.4)] {
            let sys = norm(kappa, g, 1e-5, 2.0);
            let drive = SqueezedDrive::new(r, n_l, Branch::Theta0.phase(&sys) + 0.3).unwrap();
            let bath = bath_from_drive(&drive, sys.n_th()).unwrap();
            let num = phonon_occupancy_numeric(&sys, &drive).unwrap();
            let oracle = lyapunov_occupancy(&sys, &bath);
            assert!((num / oracle - 1.0).abs() < 1e-5, "κ={kappa}: {num} vs {oracle}");
        }
    }

    #[test]
    fn weak_coupling_detailed_balance() {
        let sys = norm(2.7, 0.027, 1e-4, 10.0);
        let coherent = SqueezedDrive::coherent();
        let closed = equilibrium_occupancy(&sys, bath_occupancy(&sys, &coherent).unwrap().n_bath).unwrap();
        let num = phonon_occupancy_numeric(&sys, &coherent).unwrap();
        assert!((num / closed - 1.0).abs() < 0.01, "{num} vs {closed}");
    }

    #[test]
    fn strong_coupling_expansion() {
        let sys = norm(0.1, 0.05, 1e-9, 0.0);
        let num = phonon_occupancy_numeric(&sys, &SqueezedDrive::coherent()).unwrap();
        let est = strong_coupling_estimate(&sys);
        assert!((num / est - 1.0).abs() < 0.1, "{num} vs {est}");
    }

    #[test]
    fn numeric_bath_tracks_closed_form() {
        let sys = norm(2.7, 0.01, 1e-5, 40.0);
        let drive = SqueezedDrive::new(0.3, 0.0711, Branch::Theta0.phase(&sys)).unwrap();
        let num = bath_occupancy_numeric(&sys, &drive).unwrap();
        let closed = bath_occupancy(&sys, &drive).unwrap().n_bath;
        assert!((num / closed - 1.0).abs() < 0.01, "{num} vs {closed}");
    }
}
