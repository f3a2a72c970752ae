use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{storage::Owned, Dyn, Matrix, OMatrix, OVector, Vector4, U4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::langevin::spectrum::Spectrum;

/// Fewest samples a sideband window may hold.
pub const MIN_WINDOW_SAMPLES: usize = 16;
/// Largest residual, as a fraction of |height|, accepted as Lorentzian.
pub const LORENTZIAN_RESIDUAL_LIMIT: f64 = 0.05;
const FIT_XTOL: f64 = 1e-10;
const FIT_MAX_ITERATIONS: usize = 200;

/// Lorentzian on a flat floor: floor + height·(w/2)²/((δ − centre)² + (w/2)²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandFit {
    pub center: f64,
    /// Full width at half maximum.
    pub width: f64,
    /// Signed height relative to the floor.
    pub height: f64,
    pub floor: f64,
    /// Largest absolute residual over the window.
    pub residual_norm: f64,
}

impl SidebandFit {
    pub fn eval(&self, delta: f64) -> f64 {
        let q = 0.25 * self.width * self.width;
        self.floor + self.height * q / ((delta - self.center).powi(2) + q)
    }
}

/// Fit problem in scaled coordinates x = (δ − x0)/sx, y = (S − y0)/sy.
struct Problem {
    x: Vec<f64>,
    y: Vec<f64>,
    p: Vector4<f64>,
}

impl Problem {
    fn parts(&self, x: f64) -> (f64, f64, f64) {
        let (h, c, w) = (self.p[1], self.p[2], self.p[3]);
        let q = 0.25 * w * w;
        let d = x - c;
        let den = d * d + q;
        (q / den, h, d / den)
    }
}

impl LeastSquaresProblem<f64, Dyn, U4> for Problem {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U4>;
    type ParameterStorage = Owned<f64, U4>;

    fn set_params(&mut self, p: &Vector4<f64>) {
        self.p = *p;
    }

    fn params(&self) -> Vector4<f64> {
        self.p
    }

    fn residuals(&self) -> Option<OVector<f64, Dyn>> {
        let f = self.p[0];
        Some(OVector::<f64, Dyn>::from_iterator(
            self.x.len(),
            self.x.iter().zip(&self.y).map(|(&x, &y)| {
                let (l, h, _) = self.parts(x);
                f + h * l - y
            }),
        ))
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U4>> {
        let w = self.p[3];
        let mut j = Matrix::<f64, Dyn, U4, Owned<f64, Dyn, U4>>::zeros(self.x.len());
        for (i, &x) in self.x.iter().enumerate() {
            let (l, h, dd) = self.parts(x);
            // ∂L/∂c = 2L·d/den, ∂L/∂w = (w/2)·d²/den² = L·(1 − L)/(w/2).
            j[(i, 0)] = 1.0;
            j[(i, 1)] = l;
            j[(i, 2)] = 2.0 * h * l * dd;
            j[(i, 3)] = h * l * (1.0 - l) * 2.0 / w;
        }
        Some(j)
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Fits one sideband inside `window` (inclusive, same units as `spec`).
pub fn fit_sideband(spec: &Spectrum, window: (f64, f64)) -> Result<SidebandFit> {
    fit_samples(&spec.frequencies(), &spec.values, window)
}

/// [`fit_sideband`] on raw (frequency, value) samples.
pub fn fit_samples(freq: &[f64], values: &[f64], window: (f64, f64)) -> Result<SidebandFit> {
    if freq.len() != values.len() {
        return Err(Error::invalid("values", "frequency and value columns differ in length"));
    }
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        freq.iter().zip(values).filter(|(f, _)| (lo..=hi).contains(*f)).map(|(f, v)| (*f, *v)).unzip();
    if xs.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::InsufficientSamples { found: xs.len(), required: MIN_WINDOW_SAMPLES });
    }
    if ys.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("values", "window holds non-finite samples"));
    }

    let floor0 = median(&ys);
    let (i_ext, h0) = ys
        .iter()
        .enumerate()
        .map(|(i, y)| (i, y - floor0))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("window is non-empty");
    if h0 == 0.0 {
        return Err(Error::NotLorentzian { asymmetry: 0.0 });
    }
    let above: Vec<f64> = xs.iter().zip(&ys).filter(|(_, y)| (*y - floor0) / h0 >= 0.5).map(|(x, _)| *x).collect();
    let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let span = above.last().copied().unwrap_or(xs[i_ext]) - above.first().copied().unwrap_or(xs[i_ext]);
    let w0 = span.max(step);

    let (x0, sx, y0, sy) = (xs[i_ext], w0, floor0, h0.abs());
    let problem = Problem {
        x: xs.iter().map(|x| (x - x0) / sx).collect(),
        y: ys.iter().map(|y| (y - y0) / sy).collect(),
        p: Vector4::new(0.0, h0 / sy, 0.0, 1.0),
    };
    let (problem, report) = LevenbergMarquardt::new()
        .with_xtol(FIT_XTOL)
        .with_ftol(1e-14)
        .with_gtol(0.0)
        .with_patience(FIT_MAX_ITERATIONS)
        .minimize(problem);
    let p = problem.p;
    if !report.termination.was_successful() || !p.iter().all(|v| v.is_finite()) {
        let r = problem.residuals().map_or(f64::NAN, |r| r.amax() * sy);
        return Err(Error::NonConvergent { what: "sideband fit", estimate: p[1] * sy, error: r });
    }
    let residual = problem.residuals().map_or(f64::NAN, |r| r.amax()) * sy;
    let fit = SidebandFit {
        center: x0 + p[2] * sx,
        width: p[3].abs() * sx,
        height: p[1] * sy,
        floor: y0 + p[0] * sy,
        residual_norm: residual,
    };
    if !(fit.residual_norm <= LORENTZIAN_RESIDUAL_LIMIT * fit.height.abs()) {
        return Err(Error::NotLorentzian { asymmetry: fit.residual_norm / fit.height.abs() });
    }
    Ok(fit)
}
