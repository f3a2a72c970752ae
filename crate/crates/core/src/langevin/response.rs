use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::system::OmSystem;

pub(crate) type Transfer = SMatrix<Complex64, 4, 6>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Transfer matrix from the six input-noise operators to (a, a†, b, b†) at one
/// frequency. Rows are field amplitudes, columns the inputs in the order
/// (ξ_ext, ξ_ext†, ξ_int, ξ_int†, ξ_b, ξ_b†).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub omega: f64,
    pub transfer: Transfer,
}

fn system_matrix(sys: &OmSystem, w: f64) -> Matrix4<Complex64> {
    let (k2, g2) = (sys.kappa() / 2.0, sys.gamma_m() / 2.0);
    let (d, om, g) = (sys.delta(), sys.omega_m(), Complex64::new(sys.g(), 0.0));
    let z = Complex64::new(0.0, 0.0);
    #[rustfmt::skip]
    let a = Matrix4::new(
        k2 - I * (w + d), z, -I * g, -I * g,
        z, k2 - I * (w - d), I * g, I * g,
        -I * g, -I * g, g2 - I * (w - om), z,
        I * g, I * g, z, g2 - I * (w + om),
    );
    a
}

fn input_matrix(sys: &OmSystem) -> Transfer {
    let mut b = Transfer::zeros();
    let (se, s0, sm) = (sys.kappa_ext().sqrt(), sys.kappa_0().sqrt(), sys.gamma_m().sqrt());
    b[(0, 0)] = se.into();
    b[(1, 1)] = se.into();
    b[(0, 2)] = s0.into();
    b[(1, 3)] = s0.into();
    b[(2, 4)] = sm.into();
    b[(3, 5)] = sm.into();
    b
}

/// Largest real part among the eigenvalues of the linearized drift.
pub fn growth_rate(sys: &OmSystem) -> f64 {
    let (k2, g2) = (sys.kappa() / 2.0, sys.gamma_m() / 2.0);
    let (d, om, g) = (sys.delta(), sys.omega_m(), sys.g());
    #[rustfmt::skip]
    let drift = Matrix4::new(
        -k2, -d, 0.0, 0.0,
        d, -k2, 2.0 * g, 0.0,
        0.0, 0.0, -g2, om,
        2.0 * g, 0.0, -om, -g2,
    );
    drift.complex_eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Errors with [`Error::Unstable`] when the linearized dynamics grow.
pub fn check_stability(sys: &OmSystem) -> Result<()> {
    let rate = growth_rate(sys);
    if rate < 0.0 {
        Ok(())
    } else {
        Err(Error::Unstable { growth_rate: rate })
    }
}

/// Exact (counter-rotating terms kept) frequency response at offset ω from the drive.
pub fn solve_response(sys: &OmSystem, omega: f64) -> Result<Response> {
    check_stability(sys)?;
    Ok(response_unchecked(sys, omega))
}

pub(crate) fn response_unchecked(sys: &OmSystem, omega: f64) -> Response {
    let lu = system_matrix(sys, omega).lu();
    let transfer = lu.solve(&input_matrix(sys)).unwrap_or_else(|| Transfer::from_element(f64::NAN.into()));
    Response { omega, transfer }
}

impl Response {
    /// Coefficients of the reflected field a_out = √κ_ext·a − ξ_ext.
    pub(crate) fn output_row(&self, kappa_ext: f64) -> [Complex64; 6] {
        self.field_row(0, kappa_ext)
    }

    /// Coefficients of a_out† at this frequency.
    pub(crate) fn output_conj_row(&self, kappa_ext: f64) -> [Complex64; 6] {
        self.field_row(1, kappa_ext)
    }

    fn field_row(&self, row: usize, kappa_ext: f64) -> [Complex64; 6] {
        let s = kappa_ext.sqrt();
        let mut v = [Complex64::new(0.0, 0.0); 6];
        for (j, x) in v.iter_mut().enumerate() {
            *x = s * self.transfer[(row, j)];
        }
        v[row] -= 1.0;
        v
    }

    pub(crate) fn mechanical_row(&self) -> [Complex64; 6] {
        std::array::from_fn(|j| self.transfer[(2, j)])
    }
}
