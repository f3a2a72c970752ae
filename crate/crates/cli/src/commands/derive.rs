use serde_json::{json, Map, Value};
use sqzcool::cooling::{bath_occupancy_lossy_cavity, equilibrium_occupancy, sideband_limit, Branch};
use sqzcool::units::squeezing_db;
use sqzcool::{
    bifurcated_detunings, critical_squeezing, optical_spring, optimal_detuning, optimal_phase, scattering_rates,
    OmSystem, SqueezedDrive,
};

use crate::error::CliError;
use crate::format::{fmt_g, Format};
use crate::Context;

fn outcome<T: Into<Value>>(r: Result<T, sqzcool::Error>) -> Value {
    match r {
        Ok(v) => v.into(),
        Err(e) => json!({ "error": e.kind(), "message": e.to_string() }),
    }
}

fn cooling<T>(sys: &OmSystem, f: impl FnOnce() -> Result<T, sqzcool::Error>) -> Result<T, sqzcool::Error> {
    let rates = scattering_rates(sys);
    if rates.gamma_opt <= 0.0 {
        return Err(sqzcool::Error::NotCooling { delta: sys.delta(), gamma_opt: rates.gamma_opt });
    }
    f()
}

/// Summary document of derived quantities. Rates in rad/s.
pub fn summary(sys: &OmSystem, drive: &SqueezedDrive, eta_det: f64) -> Value {
    let rates = scattering_rates(sys);
    let r_c = critical_squeezing(sys);
    let mut doc = Map::new();
    let mut put = |k: &str, v: Value| {
        doc.insert(k.to_string(), v);
    };
    put("kappa_rad_s", sys.kappa().into());
    put("kappa_ext_rad_s", sys.kappa_ext().into());
    put("kappa_0_rad_s", sys.kappa_0().into());
    put("omega_m_rad_s", sys.omega_m().into());
    put("gamma_m_rad_s", sys.gamma_m().into());
    put("g_rad_s", sys.g().into());
    put("delta_rad_s", sys.delta().into());
    put("n_th", sys.n_th().into());
    put("gamma_plus_rad_s", rates.gamma_plus.into());
    put("gamma_minus_rad_s", rates.gamma_minus.into());
    put("gamma_opt_rad_s", rates.gamma_opt.into());
    put("gamma_tot_rad_s", rates.gamma_tot.into());
    put("delta_0_rad_s", outcome(optimal_detuning(sys)));
    put("theta_0_rad", optimal_phase(sys).into());
    put("r_c", r_c.into());
    put("r_c_db", squeezing_db(r_c).into());
    put(
        "delta_0_pm_rad_s",
        if drive.r() > 0.0 {
            outcome(bifurcated_detunings(sys, drive.r()).map(|(p, m)| json!([p, m])))
        } else {
            Value::Null
        },
    );
    put("n_m0", outcome(cooling(sys, || sideband_limit(sys))));
    put(
        "n_m_coherent",
        outcome(cooling(sys, || {
            let bath =
                bath_occupancy_lossy_cavity(sys, &SqueezedDrive::coherent().with_theta(Branch::Theta0.phase(sys)))?;
            equilibrium_occupancy(sys, bath.bath.n_bath)
        })),
    );
    put(
        "n_m_drive",
        outcome(cooling(sys, || equilibrium_occupancy(sys, bath_occupancy_lossy_cavity(sys, drive)?.bath.n_bath))),
    );
    put(
        "cooling_factor",
        if sys.gamma_m() * sys.n_th() > 0.0 {
            (rates.gamma_opt / (sys.gamma_m() * sys.n_th())).into()
        } else {
            Value::Null
        },
    );
    put("omega_tot_rad_s", outcome(optical_spring(sys)));
    put("cooperativity", if sys.gamma_m() > 0.0 { sys.cooperativity().into() } else { Value::Null });
    put("eta_det", eta_det.into());
    put("drive", json!({ "r": drive.r(), "n_l": drive.n_l(), "theta_rad": drive.theta() }));
    Value::Object(doc)
}

/// `key,value` lines; nested objects become dotted keys, failures their error kind.
fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(o) if o.contains_key("error") => {
            out.push_str(&format!("{prefix},{}\n", o["error"].as_str().unwrap_or("error")));
        }
        Value::Object(o) => {
            for (k, v) in o {
                flatten(&if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") }, v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        Value::Number(n) => out.push_str(&format!("{prefix},{}\n", fmt_g(n.as_f64().unwrap_or(f64::NAN)))),
        Value::Null => out.push_str(&format!("{prefix},nan\n")),
        other => out.push_str(&format!("{prefix},{other}\n")),
    }
}

pub fn run(cx: &mut Context) -> Result<(), CliError> {
    let sys = &cx.config.system;
    let drive = cx.config.drive.drive(sys)?;
    let doc = summary(sys, &drive, cx.config.eta_det);
    match cx.emitter.format() {
        Format::Json => {
            cx.emitter.write_json("derive.json", &doc)?;
        }
        Format::Csv => {
            let mut text = String::from("quantity,value\n");
            flatten("", &doc, &mut text);
            cx.emitter.write_text("derive.csv", &text)?;
        }
    }
    Ok(())
}
