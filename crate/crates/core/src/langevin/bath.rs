#[cfg(test)]
use nalgebra::SMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::drive::SqueezedDrive;

#[cfg(test)]
pub(crate) type Noise6 = SMatrix<Complex64, 6, 6>;

/// Second moments of the three Markovian input ports. The internal-loss port
/// is always vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    /// ⟨ξ†ξ⟩ of the external (drive) port.
    pub n: f64,
    /// ⟨ξξ⟩ of the external port.
    pub m: Complex64,
    /// Thermal occupancy of the mechanical port.
    pub n_th: f64,
}

impl BathSpec {
    pub fn new(n: f64, m: Complex64, n_th: f64) -> Result<Self> {
        if !(n.is_finite() && n >= 0.0) {
            return Err(Error::invalid("n", "must be finite and >= 0"));
        }
        if !(m.re.is_finite() && m.im.is_finite()) {
            return Err(Error::invalid("m", "must be finite"));
        }
        if !(n_th.is_finite() && n_th >= 0.0) {
            return Err(Error::invalid("n_th", "must be finite and >= 0"));
        }
        let bound = n * (n + 1.0);
        if m.norm_sqr() > bound * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::invalid("m", format!("|M|² = {} exceeds N(N+1) = {bound}", m.norm_sqr())));
        }
        Ok(BathSpec { n, m, n_th })
    }

    pub fn vacuum(n_th: f64) -> Self {
        BathSpec { n: 0.0, m: Complex64::new(0.0, 0.0), n_th }
    }

    #[cfg(test)]
    /// ⟨x_j† x_k⟩ over the stacked inputs (ξ_ext, ξ_ext†, ξ_int, ξ_int†, ξ_b, ξ_b†),
    /// indexed as D[j, k] with x_j† pairing the adjoint partner of slot j.
    pub(crate) fn normal(&self) -> Noise6 {
        let mut d = Noise6::zeros();
        d[(0, 0)] = self.n.into();
        d[(0, 1)] = self.m.conj();
        d[(1, 0)] = self.m;
        d[(1, 1)] = (self.n + 1.0).into();
        d[(3, 3)] = 1.0.into();
        d[(4, 4)] = self.n_th.into();
        d[(5, 5)] = (self.n_th + 1.0).into();
        d
    }

    #[cfg(test)]
    /// ⟨x_j x_k†⟩ over the same stacked inputs.
    pub(crate) fn antinormal(&self) -> Noise6 {
        let mut e = Noise6::zeros();
        e[(0, 0)] = (self.n + 1.0).into();
        e[(0, 1)] = self.m;
        e[(1, 0)] = self.m.conj();
        e[(1, 1)] = self.n.into();
        e[(2, 2)] = 1.0.into();
        e[(4, 4)] = (self.n_th + 1.0).into();
        e[(5, 5)] = self.n_th.into();
        e
    }
}

/// Input moments of a squeezed drive: N = n_l cosh 2r + sinh² r,
/// M = −(n_l + ½) sinh 2r e^{iθ}.
pub fn bath_from_drive(drive: &SqueezedDrive, n_th: f64) -> Result<BathSpec> {
    let (r, n_l) = (drive.r(), drive.n_l());
    let n = n_l * (2.0 * r).cosh() + r.sinh().powi(2);
    let m = Complex64::from_polar(-(n_l + 0.5) * (2.0 * r).sinh(), drive.theta());
    BathSpec::new(n, m, n_th)
}
