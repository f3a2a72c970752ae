use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{storage::Owned, Dyn, Matrix2, OMatrix, OVector, Vector2, U2};
use serde::{Deserialize, Serialize};

use super::effective::{effective_occupancies_given, modeled_occupancy};
use super::fit::SidebandFit;
use crate::cooling::occupancy::Branch;
use crate::error::{Error, Result};
use crate::model::rates::RateWeights;
use crate::model::system::{optical_spring, OmSystem};

/// Smallest κ_ext/κ₀ for which the height relations hold without a warning.
pub const OVERCOUPLING_MIN: f64 = 50.0;
const CONDITION_LIMIT: f64 = 1e8;
const NEWTON_MAX_ITERATIONS: usize = 100;
const GRID_R_MAX: f64 = 2.0;
const GRID_N_MAX: f64 = 5.0;
const GRID_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sideband {
    Upper,
    Lower,
}

/// One fitted sideband together with the drive phase branch it was taken at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub sideband: Sideband,
    pub branch: Branch,
    pub fit: SidebandFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermometryResult {
    /// Phonon occupancy under the cooling branch θ₀.
    pub n_m: f64,
    pub r: f64,
    pub n_l: f64,
    /// n_m inferred from the upper sideband alone, when it was measured at θ₀.
    pub n_m_upper: Option<f64>,
    /// n_m inferred from the lower sideband alone, when it was measured at θ₀.
    pub n_m_lower: Option<f64>,
    /// Phonon occupancy under the θ₀ − π branch, when measured.
    pub n_m_heating: Option<f64>,
    /// Largest condition estimate of the 2×2 inversions.
    pub condition: f64,
    /// Largest |model − measured| effective occupancy at the solution.
    pub residual_norm: f64,
    pub warnings: Vec<String>,
}

/// Effective occupancy implied by a fitted height, undoing η_det and the
/// scattering-rate prefactor.
fn measured_neff(obs: &Observation, g2: f64, w: &RateWeights, eta_det: f64) -> f64 {
    let f = &obs.fit;
    match obs.sideband {
        Sideband::Upper => f.height * f.width / (4.0 * eta_det * g2 * w.plus),
        Sideband::Lower => f.height * f.width / (4.0 * eta_det * g2 * w.minus) - 1.0,
    }
}

struct Model<'a> {
    sys: &'a OmSystem,
    /// (sideband, branch, measured n_eff)
    data: Vec<(Sideband, Branch, f64)>,
}

impl Model<'_> {
    fn predict(&self, x: Vector2<f64>, sideband: Sideband, branch: Branch) -> Result<f64> {
        let (r, n_l) = (x[0], x[1]);
        let n_m = modeled_occupancy(self.sys, r, n_l, branch)?;
        let e = effective_occupancies_given(self.sys, r, n_l, n_m, branch)?;
        Ok(match sideband {
            Sideband::Upper => e.upper,
            Sideband::Lower => e.lower,
        })
    }

    fn residuals(&self, x: Vector2<f64>) -> Result<Vec<f64>> {
        self.data.iter().map(|&(s, b, y)| Ok(self.predict(x, s, b)? - y)).collect()
    }

    /// Central differences, one-sided where the quadrant boundary is close.
    fn jacobian(&self, x: Vector2<f64>) -> Result<Vec<[f64; 2]>> {
        let mut cols = [Vec::new(), Vec::new()];
        for (k, col) in cols.iter_mut().enumerate() {
            let h = 1e-6 * (1.0 + x[k].abs());
            let mut hi = x;
            let mut lo = x;
            hi[k] += h;
            lo[k] = (x[k] - h).max(0.0);
            let span = hi[k] - lo[k];
            let a = self.residuals(hi)?;
            let b = self.residuals(lo)?;
            *col = a.iter().zip(&b).map(|(a, b)| (a - b) / span).collect();
        }
        Ok(cols[0].iter().zip(&cols[1]).map(|(a, b)| [*a, *b]).collect())
    }

    fn scale(&self) -> f64 {
        1.0 + self.data.iter().map(|d| d.2.abs()).fold(0.0, f64::max)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn project(x: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(x[0].max(0.0), x[1].max(0.0))
}

fn condition(j: &Matrix2<f64>) -> f64 {
    let s = j.singular_values();
    let (hi, lo) = (s.max(), s.min());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn jacobian2(model: &Model, x: Vector2<f64>) -> Result<Matrix2<f64>> {
    let j = model.jacobian(x)?;
    Ok(Matrix2::new(j[0][0], j[0][1], j[1][0], j[1][1]))
}

/// Damped Newton with backtracking, projected onto r, n_l ≥ 0 when `project_steps`.
/// Returns the final point and whether it stayed inside the quadrant.
fn newton(model: &Model, start: Vector2<f64>, project_steps: bool) -> Result<(Vector2<f64>, bool)> {
    let tol = 1e-13 * model.scale();
    let mut x = start;
    let mut res = model.residuals(x)?;
    for _ in 0..NEWTON_MAX_ITERATIONS {
        let norm = max_abs(&res);
        if norm <= tol {
            break;
        }
        let j = jacobian2(model, x)?;
        let Some(step) = j.lu().solve(&Vector2::new(-res[0], -res[1])) else {
            break;
        };
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-6 {
            let trial = x + lambda * step;
            if !project_steps && (trial[0] < 0.0 || trial[1] < 0.0) {
                return Ok((trial, false));
            }
            let trial = project(trial);
            if let Ok(r) = model.residuals(trial) {
                if max_abs(&r) < norm {
                    x = trial;
                    res = r;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((x, true))
}

fn grid_start(model: &Model) -> Result<Vector2<f64>> {
    let mut best = (f64::INFINITY, Vector2::zeros());
    for i in 0..GRID_POINTS {
        for k in 0..GRID_POINTS {
            let x = Vector2::new(
                GRID_R_MAX * i as f64 / (GRID_POINTS - 1) as f64,
                GRID_N_MAX * k as f64 / (GRID_POINTS - 1) as f64,
            );
            let n = max_abs(&model.residuals(x)?);
            if n < best.0 {
                best = (n, x);
            }
        }
    }
    Ok(best.1)
}

/// Solves the two equations of `model` for (r, n_l) in the positive quadrant.
fn solve_pair(model: &Model) -> Result<(Vector2<f64>, f64)> {
    let (mut x, inside) = newton(model, Vector2::new(0.1, 0.1), false)?;
    if !inside {
        x = newton(model, grid_start(model)?, true)?.0;
    }
    let residual = max_abs(&model.residuals(x)?);
    if !(residual <= 1e-10 * model.scale()) {
        // A stalled unprojected run may still have a root nearby.
        let (y, _) = newton(model, grid_start(model)?, true)?;
        let ry = max_abs(&model.residuals(y)?);
        if !(ry <= 1e-10 * model.scale()) {
            return Err(Error::NoSolution { residual: residual.min(ry) });
        }
        x = y;
    }
    let cond = condition(&jacobian2(model, x)?);
    if cond > CONDITION_LIMIT {
        return Err(Error::IllConditioned { condition: cond });
    }
    Ok((x, cond))
}

struct Joint<'a> {
    model: &'a Model<'a>,
    x: Vector2<f64>,
}

impl LeastSquaresProblem<f64, Dyn, U2> for Joint<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U2>;
    type ParameterStorage = Owned<f64, U2>;

    fn set_params(&mut self, x: &Vector2<f64>) {
        self.x = *x;
    }

    fn params(&self) -> Vector2<f64> {
        self.x
    }

    fn residuals(&self) -> Option<OVector<f64, Dyn>> {
        let r = self.model.residuals(project(self.x)).ok()?;
        Some(OVector::<f64, Dyn>::from_vec(r))
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U2>> {
        let j = self.model.jacobian(project(self.x)).ok()?;
        Some(OMatrix::<f64, Dyn, U2>::from_fn(j.len(), |i, k| j[i][k]))
    }
}

/// Least-squares (r, n_l) over every observation, started from `start`.
fn solve_joint(model: &Model, start: Vector2<f64>) -> Vector2<f64> {
    let (problem, report) = LevenbergMarquardt::new()
        .with_xtol(1e-14)
        .with_ftol(1e-14)
        .with_patience(100)
        .minimize(Joint { model, x: start });
    if report.termination.was_successful() {
        project(problem.x)
    } else {
        start
    }
}

/// Recovers the drive state (r, n_l) and the phonon occupancy from fitted sidebands.
///
/// At least one sideband must be present at both phase branches. When both
/// sidebands are, each pair is inverted separately and the final state is the
/// least-squares fit to all observations.
pub fn retrieve_state(obs: &[Observation], sys: &OmSystem, eta_det: f64) -> Result<ThermometryResult> {
    if !(eta_det > 0.0 && eta_det <= 1.0) {
        return Err(Error::invalid("eta_det", format!("must lie in (0, 1], got {eta_det}")));
    }
    if sys.g() <= 0.0 {
        return Err(Error::invalid("g", "thermometry needs a nonzero coupling"));
    }
    let omega_tot = optical_spring(sys)?;
    let w = RateWeights::new(sys.kappa(), omega_tot, sys.delta());
    RateWeights::of(sys).require_cooling(sys)?;
    for o in obs {
        if !(o.fit.width > 0.0 && o.fit.height.is_finite()) {
            return Err(Error::invalid("fit", "sideband fits need a positive width and finite height"));
        }
    }

    let mut warnings = Vec::new();
    let ratio = sys.kappa_ext() / sys.kappa_0();
    if ratio < OVERCOUPLING_MIN {
        warnings.push(format!(
            "kappa_ext/kappa_0 = {ratio:.3} is below {OVERCOUPLING_MIN}; height relations assume a strongly overcoupled cavity"
        ));
    }

    let g2 = sys.g().powi(2);
    let data: Vec<_> = obs.iter().map(|o| (o.sideband, o.branch, measured_neff(o, g2, &w, eta_det))).collect();
    let pair = |side: Sideband| -> Option<Model> {
        let at = |b: Branch| data.iter().find(|d| d.0 == side && d.1 == b).copied();
        Some(Model { sys, data: vec![at(Branch::Theta0)?, at(Branch::Theta0MinusPi)?] })
    };

    let mut solutions = Vec::new();
    let mut cond: f64 = 0.0;
    for side in [Sideband::Upper, Sideband::Lower] {
        if let Some(m) = pair(side) {
            let (x, c) = solve_pair(&m)?;
            solutions.push(x);
            cond = cond.max(c);
        }
    }
    if solutions.is_empty() {
        return Err(Error::invalid("observations", "need one sideband measured at both phase branches"));
    }

    let all = Model { sys, data };
    let mean = solutions.iter().sum::<Vector2<f64>>() / solutions.len() as f64;
    let x = if all.data.len() > 2 { solve_joint(&all, mean) } else { mean };
    let (r, n_l) = (x[0], x[1]);
    let residual_norm = max_abs(&all.residuals(x)?);

    // Per-observation n_m: the measured n_eff minus the drive corrections.
    let infer = |side: Sideband, branch: Branch| -> Result<Option<f64>> {
        let vals = all
            .data
            .iter()
            .filter(|d| d.0 == side && d.1 == branch)
            .map(|&(_, b, y)| {
                let e = effective_occupancies_given(sys, r, n_l, 0.0, b)?;
                Ok(y - if side == Sideband::Upper { e.upper } else { e.lower })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64))
    };
    let n_m_upper = infer(Sideband::Upper, Branch::Theta0)?;
    let n_m_lower = infer(Sideband::Lower, Branch::Theta0)?;
    let heating = [infer(Sideband::Upper, Branch::Theta0MinusPi)?, infer(Sideband::Lower, Branch::Theta0MinusPi)?];
    let heating: Vec<f64> = heating.into_iter().flatten().collect();
    let n_m_heating = (!heating.is_empty()).then(|| heating.iter().sum::<f64>() / heating.len() as f64);
    let n_m = match (n_m_upper, n_m_lower) {
        (Some(a), Some(b)) => 0.5 * (a + b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => modeled_occupancy(sys, r, n_l, Branch::Theta0)?,
    };

    Ok(ThermometryResult { n_m, r, n_l, n_m_upper, n_m_lower, n_m_heating, condition: cond, residual_norm, warnings })
}
