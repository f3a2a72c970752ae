use rayon::prelude::*;
use serde::Serialize;

use super::occupancy::{bath_occupancy_at, Branch};
use crate::error::{Error, Result};
use crate::model::drive::SqueezedDrive;
use crate::model::system::{OmParams, OmSystem};

/// Bath occupancy over a (κ/Ω, Δ/Ω) grid with θ = θ₀ at every point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolMap {
    pub kappa_axis: Vec<f64>,
    pub delta_axis: Vec<f64>,
    /// Row-major over (κ, Δ); `NaN` marks points that do not cool.
    pub values: Vec<f64>,
    pub r: f64,
    pub n_l: f64,
}

impl CoolMap {
    pub fn get(&self, i_kappa: usize, i_delta: usize) -> f64 {
        self.values[i_kappa * self.delta_axis.len() + i_delta]
    }

    /// Rows in output order: (κ/Ω, Δ/Ω, n_bath).
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let nd = self.delta_axis.len();
        self.values.iter().enumerate().map(move |(k, &v)| (self.kappa_axis[k / nd], self.delta_axis[k % nd], v))
    }
}

fn check_axis(name: &'static str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::invalid(name, "axis is empty"));
    }
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(name, "axis holds non-finite values"));
    }
    let up = axis.windows(2).all(|w| w[1] > w[0]);
    let down = axis.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::invalid(name, "axis must be strictly monotone"));
    }
    Ok(())
}

/// Evaluates the θ₀ bath occupancy on every (κ/Ω, Δ/Ω) grid point in normalized
/// units without the optical spring.
pub fn cool_map(kappa_axis: &[f64], delta_axis: &[f64], r: f64, n_l: f64) -> Result<CoolMap> {
    check_axis("kappa_axis", kappa_axis)?;
    check_axis("delta_axis", delta_axis)?;
    if kappa_axis.iter().any(|&k| k <= 0.0) {
        return Err(Error::invalid("kappa_axis", "entries must be > 0"));
    }
    SqueezedDrive::new(r, n_l, 0.0)?;
    let nd = delta_axis.len();
    let values = (0..kappa_axis.len() * nd)
        .into_par_iter()
        .map(|k| {
            let params = OmParams::normalized(kappa_axis[k / nd], delta_axis[k % nd], 0.0);
            OmSystem::new(params)
                .and_then(|sys| bath_occupancy_at(&sys, r, n_l, Branch::Theta0))
                .map_or(f64::NAN, |b| b.n_bath)
        })
        .collect();
    Ok(CoolMap { kappa_axis: kappa_axis.to_vec(), delta_axis: delta_axis.to_vec(), values, r, n_l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rates::{bifurcated_detunings, critical_squeezing};
    use crate::model::system::optimal_detuning;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    fn argmin(v: &[f64]) -> usize {
        v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0
    }

    #[test]
    fn coherent_ridge_follows_optimal_detuning() {
        let kappas = [0.3, 1.0, 2.7, 6.0];
        let deltas = linspace(-10.0, -0.1, 991);
        let m = cool_map(&kappas, &deltas, 0.0, 0.0).unwrap();
        for (i, &k) in kappas.iter().enumerate() {
            let row: Vec<f64> = (0..deltas.len()).map(|j| m.get(i, j)).collect();
            let d0 = optimal_detuning(&OmSystem::new(OmParams::normalized(k, -1.0, 0.0)).unwrap()).unwrap();
            assert!((deltas[argmin(&row)] - d0).abs() <= 0.01, "κ={k}");
        }
    }

    #[test]
    fn critical_cut_vanishes_at_optimum() {
        let sys = OmSystem::new(OmParams::normalized(2.7, -1.0, 0.0)).unwrap();
        let d0 = optimal_detuning(&sys).unwrap();
        let rc = critical_squeezing(&sys);
        let m = cool_map(&[2.7], &[d0 - 0.5, d0, d0 + 0.5], rc, 0.0).unwrap();
        assert!(m.get(0, 1).abs() < 1e-13);
        assert!(m.get(0, 0) > 1e-4 && m.get(0, 2) > 1e-4, "{:?}", m.values);
    }

    #[test]
    fn strong_squeezing_has_two_zeros() {
        let sys = OmSystem::new(OmParams::normalized(2.7, -1.0, 0.0)).unwrap();
        let (p, q) = bifurcated_detunings(&sys, 0.8).unwrap();
        let m = cool_map(&[2.7], &[q, 0.5 * (p + q), p], 0.8, 0.0).unwrap();
        assert!(m.get(0, 0) < 1e-12 && m.get(0, 2) < 1e-12);
        assert!(m.get(0, 1) > 1e-3);
    }

    #[test]
    fn blue_points_are_nan() {
        let m = cool_map(&[1.0, 2.0], &[-1.0, 0.0, 0.5], 0.3, 0.1).unwrap();
        assert_eq!(m.values.len(), 6);
        assert!(m.get(1, 0).is_finite());
        assert!(m.get(0, 1).is_nan() && m.get(1, 2).is_nan());
        let rows: Vec<_> = m.rows().collect();
        assert_eq!((rows[4].0, rows[4].1), (2.0, 0.0));
    }

    #[test]
    fn single_point_map() {
        let m = cool_map(&[2.7], &[-1.68], 0.0, 0.0).unwrap();
        assert_eq!(m.values.len(), 1);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(cool_map(&[], &[-1.0], 0.0, 0.0).is_err());
        assert!(cool_map(&[1.0, 1.0], &[-1.0], 0.0, 0.0).is_err());
        assert!(cool_map(&[1.0, 3.0, 2.0], &[-1.0], 0.0, 0.0).is_err());
        assert!(cool_map(&[0.0], &[-1.0], 0.0, 0.0).is_err());
        assert!(cool_map(&[1.0], &[-1.0], -0.1, 0.0).is_err());
    }
}
