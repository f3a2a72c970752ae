use std::f64::consts::FRAC_PI_4;

use serde_json::{json, Value};
use sqzcool::cooling::Branch;
use sqzcool::langevin::{detected_spectrum, output_spectrum, FreqGrid, SpectrumKind};
use sqzcool::{bifurcated_detunings, critical_squeezing, optimal_detuning, scattering_rates, OmSystem, SqueezedDrive};

use crate::config::{DriveSpec, SpectraConfig};
use crate::error::CliError;
use crate::format::Table;
use crate::Context;

pub const MODE_NAMES: [&str; 5] = ["single", "theta", "r", "ponderomotive", "branches"];

/// Everything a mode needs to produce its files.
pub struct Plan<'a> {
    pub sys: &'a OmSystem,
    pub cfg: &'a SpectraConfig,
    pub drive: DriveSpec,
    pub eta_det: f64,
}

pub struct Output {
    pub stem: String,
    pub table: Table,
    pub meta: Value,
}

/// One way of sweeping the spectra.
pub trait SpectraMode: Send + Sync {
    fn name(&self) -> &'static str;
    fn outputs(&self, plan: &Plan) -> Result<Vec<Output>, CliError>;
}

pub fn registry() -> Vec<Box<dyn SpectraMode>> {
    vec![Box::new(Single), Box::new(ThetaSweep), Box::new(RSweep), Box::new(Ponderomotive), Box::new(Branches)]
}

impl Plan<'_> {
    /// Grid for one sideband (`sign` = +1 upper, −1 lower), in rad/s, ascending.
    fn grid(&self, sign: f64) -> Result<FreqGrid, CliError> {
        let axis = &self.cfg.delta_over_omega;
        let (a, b, n) = (axis[0], axis[axis.len() - 1], axis.len());
        let uniform = crate::config::linspace(a, b, n, false);
        if axis.iter().zip(&uniform).any(|(x, u)| (x - u).abs() > 1e-9 * (b - a).abs().max(1.0)) {
            return Err(CliError::Usage("spectra.delta_over_omega must be an evenly spaced axis".into()));
        }
        let w = self.sys.omega_m();
        let (lo, hi) = if sign > 0.0 { (a * w, b * w) } else { (-b * w, -a * w) };
        let grid = if n == 1 { FreqGrid::new(lo, lo, 1) } else { FreqGrid::new(lo.min(hi), lo.max(hi), n) };
        Ok(grid?)
    }

    fn state(&self) -> Result<(f64, f64), CliError> {
        let d = self.drive.drive(self.sys)?;
        Ok((d.r(), d.n_l()))
    }

    /// Detected heterodyne PSD on every configured sideband, rows (δ/Ω, psd).
    fn heterodyne(&self, sys: &OmSystem, drive: &SqueezedDrive) -> Result<Vec<(f64, f64)>, CliError> {
        let mut rows = Vec::new();
        for &sign in self.sidebands_ascending().iter() {
            let grid = self.grid(sign)?;
            let spec = output_spectrum(sys, drive, SpectrumKind::Heterodyne, &grid)?;
            let spec = detected_spectrum(&spec, self.eta_det)?;
            rows.extend(spec.frequencies().iter().zip(&spec.values).map(|(f, v)| (f / self.sys.omega_m(), *v)));
        }
        Ok(rows)
    }

    fn sidebands_ascending(&self) -> Vec<f64> {
        let mut s = self.cfg.sidebands.clone();
        s.sort_by(f64::total_cmp);
        s
    }

    fn base_meta(&self, mode: &str) -> Value {
        json!({
            "command": "spectra",
            "mode": mode,
            "eta_det": self.eta_det,
            "kappa_over_omega": self.sys.kappa() / self.sys.omega_m(),
            "delta_over_omega": self.sys.delta() / self.sys.omega_m(),
            "g_over_omega": self.sys.g() / self.sys.omega_m(),
            "drive": self.drive,
            "normalization": "shot_noise",
        })
    }
}

struct Single;

impl SpectraMode for Single {
    fn name(&self) -> &'static str {
        "single"
    }

    fn outputs(&self, plan: &Plan) -> Result<Vec<Output>, CliError> {
        let drive = plan.drive.drive(plan.sys)?;
        let mut table = Table::new(&["delta_over_omega", "psd_snl"]);
        for (d, v) in plan.heterodyne(plan.sys, &drive)? {
            table.push(vec![d, v]);
        }
        Ok(vec![Output { stem: "spectrum".into(), table, meta: plan.base_meta(self.name()) }])
    }
}

/// Fixed (r, n_l), phase swept as offsets from θ₀.
struct ThetaSweep;

impl SpectraMode for ThetaSweep {
    fn name(&self) -> &'static str {
        "theta"
    }

    fn outputs(&self, plan: &Plan) -> Result<Vec<Output>, CliError> {
        if plan.cfg.theta_offsets.is_empty() {
            return Err(CliError::Usage("spectra mode `theta` needs theta_offsets_rad".into()));
        }
        let (r, n_l) = plan.state()?;
        let theta0 = Branch::Theta0.phase(plan.sys);
        let mut table = Table::new(&["theta_offset_rad", "delta_over_omega", "psd_snl"]);
        for &off in &plan.cfg.theta_offsets {
            let drive = SqueezedDrive::new(r, n_l, theta0 + off)?;
            for (d, v) in plan.heterodyne(plan.sys, &drive)? {
                table.push(vec![off, d, v]);
            }
        }
        let mut meta = plan.base_meta(self.name());
        meta["theta_0_rad"] = theta0.into();
        meta["r_over_r_c"] = (r / critical_squeezing(plan.sys)).into();
        Ok(vec![Output { stem: "spectra_theta".into(), table, meta }])
    }
}

/// r swept at the configured phase branch, optionally following the bifurcated detuning.
struct RSweep;

impl RSweep {
    fn system_for(plan: &Plan, r: f64, reference_gamma_opt: f64) -> Result<OmSystem, CliError> {
        if plan.cfg.detuning == "fixed" {
            return Ok(*plan.sys);
        }
        let delta = if r >= critical_squeezing(plan.sys) {
            bifurcated_detunings(plan.sys, r)?.0
        } else {
            optimal_detuning(plan.sys)?
        };
        let sys = plan.sys.with_delta(delta)?;
        if plan.cfg.hold == "gamma_opt" {
            let here = scattering_rates(&sys).gamma_opt;
            if here <= 0.0 {
                return Err(sqzcool::Error::NotCooling { delta, gamma_opt: here }.into());
            }
            return Ok(sys.with_g(sys.g() * (reference_gamma_opt / here).sqrt())?);
        }
        Ok(sys)
    }
}

impl SpectraMode for RSweep {
    fn name(&self) -> &'static str {
        "r"
    }

    fn outputs(&self, plan: &Plan) -> Result<Vec<Output>, CliError> {
        if plan.cfg.r.is_empty() {
            return Err(CliError::Usage("spectra mode `r` needs r".into()));
        }
        let (_, n_l) = plan.state()?;
        let phase = plan.drive.phase();
        let reference = scattering_rates(plan.sys).gamma_opt;
        let mut table = Table::new(&["r", "delta_over_omega", "psd_snl"]);
        let mut points = Vec::new();
        for &r in &plan.cfg.r {
            let sys = Self::system_for(plan, r, reference)?;
            let drive = SqueezedDrive::new(r, n_l, phase.resolve(&sys))?;
            for (d, v) in plan.heterodyne(&sys, &drive)? {
                table.push(vec![r, d, v]);
            }
            points.push(json!({
                "r": r,
                "detuning_over_omega": sys.delta() / sys.omega_m(),
                "g_over_omega": sys.g() / sys.omega_m(),
                "gamma_opt_over_omega": scattering_rates(&sys).gamma_opt / sys.omega_m(),
            }));
        }
        let mut meta = plan.base_meta(self.name());
        meta["detuning"] = plan.cfg.detuning.clone().into();
        meta["hold"] = plan.cfg.hold.clone().into();
        meta["r_c"] = critical_squeezing(plan.sys).into();
        meta["points"] = points.into();
        Ok(vec![Output { stem: "spectra_r".into(), table, meta }])
    }
}

/// Homodyne spectra at fixed quadratures plus the best quadrature at each δ.
struct Ponderomotive;

impl SpectraMode for Ponderomotive {
    fn name(&self) -> &'static str {
        "ponderomotive"
    }

    fn outputs(&self, plan: &Plan) -> Result<Vec<Output>, CliError> {
        let drive = plan.drive.drive(plan.sys)?;
        let homodyne = |angle: f64, sign: f64| -> Result<(Vec<f64>, Vec<f64>), CliError> {
            let grid = plan.grid(sign)?;
            let spec = output_spectrum(plan.sys, &drive, SpectrumKind::Homodyne { angle }, &grid)?;
            let spec = detected_spectrum(&spec, plan.eta_det)?;
            Ok((spec.frequencies().iter().map(|f| f / plan.sys.omega_m()).collect(), spec.values))
        };

        let mut fixed = Table::new(&["angle_rad", "delta_over_omega", "psd_snl", "psd_db"]);
        let mut best = Table::new(&["delta_over_omega", "min_psd_snl", "min_psd_db", "angle_rad"]);
        for &sign in plan.sidebands_ascending().iter() {
            for &angle in &plan.cfg.angles {
                let (d, v) = homodyne(angle, sign)?;
                for (d, v) in d.into_iter().zip(v) {
                    fixed.push(vec![angle, d, v, 10.0 * v.log10()]);
                }
            }
            // S(φ) = A + Re(B e^{−2iφ}); three quadratures fix A and B.
            let (d, s0) = homodyne(0.0, sign)?;
            let (_, s90) = homodyne(2.0 * FRAC_PI_4, sign)?;
            let (_, s45) = homodyne(FRAC_PI_4, sign)?;
            for i in 0..d.len() {
                let a = 0.5 * (s0[i] + s90[i]);
                let (re, im) = (0.5 * (s0[i] - s90[i]), s45[i] - a);
                let min = a - re.hypot(im);
                let angle = 0.5 * im.atan2(re) + 2.0 * FRAC_PI_4;
                best.push(vec![d[i], min, 10.0 * min.log10(), angle]);
            }
        }
        let mut out =
            vec![Output { stem: "ponderomotive_best".into(), table: best, meta: plan.base_meta(self.name()) }];
        if !plan.cfg.angles.is_empty() {
            out.push(Output { stem: "ponderomotive".into(), table: fixed, meta: plan.base_meta(self.name()) });
        }
        Ok(out)
    }
}

/// Both sidebands at both phase branches, written in the measured-spectrum schema.
struct Branches;

impl SpectraMode for Branches {
    fn name(&self) -> &'static str {
        "branches"
    }

    fn outputs(&self, plan: &Plan) -> Result<Vec<Output>, CliError> {
        let (r, n_l) = plan.state()?;
        let mut out = Vec::new();
        for (bname, branch) in [("theta0", Branch::Theta0), ("theta0_minus_pi", Branch::Theta0MinusPi)] {
            let drive = SqueezedDrive::new(r, n_l, branch.phase(plan.sys))?;
            for &sign in &plan.cfg.sidebands {
                let grid = plan.grid(sign)?;
                let spec = detected_spectrum(
                    &output_spectrum(plan.sys, &drive, SpectrumKind::Heterodyne, &grid)?,
                    plan.eta_det,
                )?;
                let mut table = Table::new(&["frequency", "psd_snl"]);
                table.preamble.push("frequency_unit=delta_over_omega".into());
                for (f, v) in spec.frequencies().iter().zip(&spec.values) {
                    table.push(vec![f / plan.sys.omega_m(), *v]);
                }
                let side = if sign > 0.0 { "upper" } else { "lower" };
                let mut meta = plan.base_meta(self.name());
                meta["branch"] = bname.into();
                meta["sideband"] = side.into();
                out.push(Output { stem: format!("{side}_{bname}"), table, meta });
            }
        }
        Ok(out)
    }
}

pub fn run(cx: &mut Context) -> Result<(), CliError> {
    let cfg = cx.config.spectra.clone().ok_or_else(|| CliError::Usage("`spectra` needs a [spectra] section".into()))?;
    let plan = Plan { sys: &cx.config.system, cfg: &cfg, drive: cx.config.drive, eta_det: cx.config.eta_det };
    let mode = registry().into_iter().find(|m| m.name() == cfg.mode).expect("config validated the mode name");
    let outputs = mode.outputs(&plan)?;
    for o in outputs {
        // The measured-spectrum schema is CSV only.
        if mode.name() == "branches" {
            cx.emitter.write_text(&format!("{}.csv", o.stem), &o.table.to_csv())?;
            cx.emitter.write_json(&format!("{}.meta.json", o.stem), &o.meta)?;
        } else {
            cx.emitter.write_table(&o.stem, &o.table, &o.meta)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Phase;

    #[test]
    fn registry_matches_config_names() {
        let names: Vec<_> = registry().iter().map(|m| m.name()).collect();
        assert_eq!(names, MODE_NAMES);
    }

    #[test]
    fn phase_enum_round_trip() {
        assert!(matches!(DriveSpec::Coherent.phase(), Phase::Branch(Branch::Theta0)));
    }
}
