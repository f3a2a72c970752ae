use std::fs::File;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use sqzcool::cooling::Branch;
use sqzcool::thermometry::{
    fit_samples, read_measured_spectrum, retrieve_state, Observation, Sideband, SidebandFit, ThermometryResult,
};
use sqzcool::{optical_spring, scattering_rates};

use crate::config::FitInput;
use crate::error::CliError;
use crate::Context;

#[derive(Debug, Serialize)]
struct FittedFile {
    path: String,
    sideband: Sideband,
    branch: Branch,
    fit: SidebandFit,
}

#[derive(Debug, Serialize)]
struct FitReport {
    result: ThermometryResult,
    eta_det: f64,
    fits: Vec<FittedFile>,
}

fn parse_input(arg: &str) -> Result<FitInput, CliError> {
    let (key, path) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected <sideband>_<branch>=<path>, got `{arg}`")))?;
    let (sideband, branch) = match key {
        "upper_theta0" => ("upper", Branch::Theta0),
        "upper_theta0_minus_pi" => ("upper", Branch::Theta0MinusPi),
        "lower_theta0" => ("lower", Branch::Theta0),
        "lower_theta0_minus_pi" => ("lower", Branch::Theta0MinusPi),
        other => return Err(CliError::Usage(format!("unknown input `{other}`"))),
    };
    Ok(FitInput { path: PathBuf::from(path), sideband: sideband.into(), branch })
}

pub fn run(cx: &mut Context, extra: &[String]) -> Result<(), CliError> {
    let sys = &cx.config.system;
    let mut inputs = cx.config.fit.as_ref().map(|f| f.inputs.clone()).unwrap_or_default();
    for arg in extra {
        let input = parse_input(arg)?;
        inputs.retain(|i| !(i.sideband == input.sideband && i.branch == input.branch));
        inputs.push(input);
    }
    if inputs.is_empty() {
        return Err(CliError::Usage("`fit` needs input spectra in [fit] or on the command line".into()));
    }
    let k = cx.config.fit.as_ref().map_or(10.0, |f| f.window_linewidths);
    let centre = optical_spring(sys)?;
    let half = k * scattering_rates(sys).gamma_tot;

    let fits = inputs
        .par_iter()
        .map(|input| -> Result<FittedFile, CliError> {
            let file = File::open(&input.path).map_err(|e| CliError::io(&input.path, e))?;
            let at = CliError::at(input.path.display().to_string());
            let measured = read_measured_spectrum(file).map_err(at)?;
            let freq = measured.angular_frequencies(sys.omega_m());
            let (sideband, c) =
                if input.sideband == "upper" { (Sideband::Upper, centre) } else { (Sideband::Lower, -centre) };
            let fit = fit_samples(&freq, &measured.psd_snl, (c - half, c + half))
                .map_err(CliError::at(input.path.display().to_string()))?;
            Ok(FittedFile { path: input.path.display().to_string(), sideband, branch: input.branch, fit })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let obs: Vec<Observation> =
        fits.iter().map(|f| Observation { sideband: f.sideband, branch: f.branch, fit: f.fit }).collect();
    let result = retrieve_state(&obs, sys, cx.config.eta_det)?;
    cx.emitter.write_json("fit.json", &FitReport { result, eta_det: cx.config.eta_det, fits })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_inputs() {
        let i = parse_input("lower_theta0_minus_pi=data/x.csv").unwrap();
        assert_eq!((i.sideband.as_str(), i.branch), ("lower", Branch::Theta0MinusPi));
        assert!(parse_input("upper=x.csv").is_err());
        assert!(parse_input("x.csv").is_err());
    }
}
