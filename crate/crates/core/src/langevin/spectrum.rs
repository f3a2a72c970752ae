use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bath::{bath_from_drive, BathSpec};
use super::response::{check_stability, response_unchecked};
use crate::error::{Error, Result};
use crate::model::drive::SqueezedDrive;
use crate::model::system::OmSystem;
use crate::units::{HBAR, K_B};

/// Uniform grid of frequency offsets δ from the drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FreqGrid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return Err(Error::invalid("grid", format!("need finite start < stop, got [{start}, {stop}]")));
        }
        if count < 2 {
            return Err(Error::invalid("grid", format!("need at least 2 points, got {count}")));
        }
        Ok(FreqGrid { start, stop, count })
    }

    /// Grid centred on `centre` with half-width `half`.
    pub fn around(centre: f64, half: f64, count: usize) -> Result<Self> {
        FreqGrid::new(centre - half, centre + half, count)
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.stop
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SpectrumKind {
    /// Phase-insensitive detection of the reflected field.
    Heterodyne,
    /// Symmetrized spectrum of the quadrature e^{−iφ}a_out + e^{iφ}a_out†.
    Homodyne { angle: f64 },
    /// Phonon-number density ⟨b†b⟩(ω) of the mechanical mode.
    Mechanical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Vacuum input reads 1.
    ShotNoise,
    /// Integrates to the phonon occupancy under ∫ dω/2π.
    PhononDensity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub grid: FreqGrid,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
    pub normalization: Normalization,
    /// Overall detection efficiency applied so far (1 for the bare field).
    pub eta_det: f64,
}

impl Spectrum {
    pub fn frequencies(&self) -> Vec<f64> {
        self.grid.points()
    }
}

/// Normally ordered density v†·D·v for a field with input coefficients `v`.
pub(crate) fn normal_density(bath: &BathSpec, v: &[num_complex::Complex64; 6]) -> f64 {
    let cross = (v[0].conj() * bath.m.conj() * v[1]).re;
    bath.n * v[0].norm_sqr()
        + (bath.n + 1.0) * v[1].norm_sqr()
        + 2.0 * cross
        + v[3].norm_sqr()
        + bath.n_th * v[4].norm_sqr()
        + (bath.n_th + 1.0) * v[5].norm_sqr()
}

/// Unsymmetrized quadrature density qᵀ·E·q̄.
fn quadrature_density(bath: &BathSpec, q: &[num_complex::Complex64; 6]) -> f64 {
    let cross = (q[0] * bath.m * q[1].conj()).re;
    (bath.n + 1.0) * q[0].norm_sqr()
        + bath.n * q[1].norm_sqr()
        + 2.0 * cross
        + q[2].norm_sqr()
        + (bath.n_th + 1.0) * q[4].norm_sqr()
        + bath.n_th * q[5].norm_sqr()
}

/// Normally ordered photon-flux density of the reflected field at δ.
pub(crate) fn output_photon_density(sys: &OmSystem, bath: &BathSpec, delta: f64) -> f64 {
    normal_density(bath, &response_unchecked(sys, delta).output_row(sys.kappa_ext()))
}

pub(crate) fn heterodyne_density(sys: &OmSystem, bath: &BathSpec, delta: f64) -> f64 {
    1.0 + output_photon_density(sys, bath, delta)
}

pub(crate) fn homodyne_density(sys: &OmSystem, bath: &BathSpec, angle: f64, delta: f64) -> f64 {
    let phase = num_complex::Complex64::from_polar(1.0, angle);
    let one_side = |w: f64| {
        let resp = response_unchecked(sys, w);
        let v = resp.output_row(sys.kappa_ext());
        let u = resp.output_conj_row(sys.kappa_ext());
        let q: [num_complex::Complex64; 6] = std::array::from_fn(|j| phase.conj() * v[j] + phase * u[j]);
        quadrature_density(bath, &q)
    };
    0.5 * (one_side(delta) + one_side(-delta))
}

pub(crate) fn mechanical_density(sys: &OmSystem, bath: &BathSpec, omega: f64) -> f64 {
    normal_density(bath, &response_unchecked(sys, omega).mechanical_row())
}

fn sample(grid: &FreqGrid, f: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
    (0..grid.count).into_par_iter().map(|i| f(grid.point(i))).collect()
}

/// Reflected-field spectrum in shot-noise units.
pub fn output_spectrum(sys: &OmSystem, drive: &SqueezedDrive, kind: SpectrumKind, grid: &FreqGrid) -> Result<Spectrum> {
    check_stability(sys)?;
    let bath = bath_from_drive(drive, sys.n_th())?;
    let values = match kind {
        SpectrumKind::Heterodyne => sample(grid, |d| heterodyne_density(sys, &bath, d)),
        SpectrumKind::Homodyne { angle } => {
            if !angle.is_finite() {
                return Err(Error::invalid("angle", "must be finite"));
            }
            sample(grid, |d| homodyne_density(sys, &bath, angle, d))
        }
        SpectrumKind::Mechanical => {
            return Err(Error::invalid("kind", "use mechanical_spectrum for the mechanical density"));
        }
    };
    Ok(Spectrum { grid: *grid, values, kind, normalization: Normalization::ShotNoise, eta_det: 1.0 })
}

/// Phonon-number density ⟨b†b⟩(ω) of the mechanical mode.
pub fn mechanical_spectrum(sys: &OmSystem, drive: &SqueezedDrive, grid: &FreqGrid) -> Result<Spectrum> {
    check_stability(sys)?;
    let bath = bath_from_drive(drive, sys.n_th())?;
    let values = sample(grid, |w| mechanical_density(sys, &bath, w));
    Ok(Spectrum {
        grid: *grid,
        values,
        kind: SpectrumKind::Mechanical,
        normalization: Normalization::PhononDensity,
        eta_det: 1.0,
    })
}

/// Inefficient detection as a beamsplitter with vacuum: S → 1 + η(S − 1).
pub fn detected_spectrum(spec: &Spectrum, eta_det: f64) -> Result<Spectrum> {
    if !(0.0..=1.0).contains(&eta_det) {
        return Err(Error::invalid("eta_det", format!("must lie in [0, 1], got {eta_det}")));
    }
    if spec.kind == SpectrumKind::Mechanical {
        return Err(Error::invalid("kind", "detection applies to field spectra only"));
    }
    Ok(Spectrum {
        values: spec.values.iter().map(|s| 1.0 + eta_det * (s - 1.0)).collect(),
        eta_det: spec.eta_det * eta_det,
        ..spec.clone()
    })
}

/// Efficiency of a phase-insensitive amplifier chain with noise temperature
/// `t_n` (K) at carrier `omega_c` (rad/s): ħω/(k_B·T_N + ħω/2).
pub fn detection_efficiency(omega_c: f64, t_n: f64) -> Result<f64> {
    if !(omega_c.is_finite() && omega_c > 0.0) {
        return Err(Error::invalid("omega_c", "must be finite and > 0"));
    }
    if !(t_n.is_finite() && t_n >= 0.0) {
        return Err(Error::invalid("t_n", "must be finite and >= 0"));
    }
    let quantum = HBAR * omega_c;
    Ok((quantum / (K_B * t_n + 0.5 * quantum)).min(1.0))
}
