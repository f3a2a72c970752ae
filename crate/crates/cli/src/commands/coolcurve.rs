use rayon::prelude::*;
use serde_json::json;
use sqzcool::cooling::{bath_occupancy_lossy_cavity, OccupancyModel, OccupancyRegistry};
use sqzcool::units::squeezing_db;
use sqzcool::{drive_from_loss, OmSystem, SqueezedDrive};

use crate::config::Phase;
use crate::error::CliError;
use crate::format::Table;
use crate::Context;

fn occupancy(
    model: &dyn OccupancyModel,
    sys: &OmSystem,
    r_in: f64,
    eta_in: f64,
    phase: Phase,
) -> Result<f64, sqzcool::Error> {
    let drive = SqueezedDrive::from_loss(r_in, eta_in, phase.resolve(sys))?;
    model.phonon_occupancy(sys, &drive)
}

pub fn run(cx: &mut Context) -> Result<(), CliError> {
    let c =
        cx.config.coolcurve.clone().ok_or_else(|| CliError::Usage("`coolcurve` needs a [coolcurve] section".into()))?;
    let sys = &cx.config.system;
    let phase = cx.config.drive.phase();
    let registry = OccupancyRegistry::default();
    let model = registry.get(&c.model)?;
    let reference = occupancy(model, sys, 0.0, c.eta_in, phase).map_err(CliError::at("coherent reference"))?;

    let rows = c
        .r_in
        .par_iter()
        .map(|&r_in| -> Result<Vec<f64>, CliError> {
            let at = |e: sqzcool::Error| CliError::CoreAt { context: format!("r_in={r_in}"), source: e };
            let (r, n_l) = drive_from_loss(r_in, c.eta_in).map_err(at)?;
            let drive = SqueezedDrive::new(r, n_l, phase.resolve(sys)).map_err(at)?;
            let n_bath = match bath_occupancy_lossy_cavity(sys, &drive) {
                Ok(b) => b.bath.n_bath,
                Err(sqzcool::Error::GenericPhase { .. }) => f64::NAN,
                Err(e) => return Err(at(e)),
            };
            let n_m = model.phonon_occupancy(sys, &drive).map_err(at)?;
            let mut row = vec![r_in, squeezing_db(r_in), r, n_l, n_bath, n_m, 10.0 * (n_m / reference).log10()];
            if let Some((lo, hi)) = c.band {
                let a = occupancy(model, sys, r_in, lo, phase).map_err(at)?;
                let b = occupancy(model, sys, r_in, hi, phase).map_err(at)?;
                row.extend([a.min(b), a.max(b)]);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut columns = vec!["r_in", "r_in_db", "r", "n_l", "n_bath", "n_m", "n_m_rel_db"];
    if c.band.is_some() {
        columns.extend(["n_m_band_lo", "n_m_band_hi"]);
    }
    let mut table = Table::new(&columns);
    for row in rows {
        table.push(row);
    }
    let meta = json!({
        "command": "coolcurve",
        "model": model.name(),
        "eta_in": c.eta_in,
        "eta_in_band": c.band.map(|(a, b)| [a, b]),
        "phase": phase,
        "n_m_coherent": reference,
        "n_m_rel_db": "10 log10(n_m / n_m at r_in = 0)",
    });
    cx.emitter.write_table("coolcurve", &table, &meta)?;
    Ok(())
}
