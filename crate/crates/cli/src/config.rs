//! Run configuration: `[section]` blocks of `key = value` pairs where every
//! physical quantity names its unit in the key.
//!
//! Rates take one of the suffixes `_hz`, `_khz`, `_mhz`, `_ghz` (cyclic
//! frequency, converted to rad/s) or `_rad_s` (angular, also used for
//! normalized runs with Ω = 1).

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use sqzcool::cooling::Branch;
use sqzcool::langevin::detection_efficiency;
use sqzcool::units::r_from_db;
use sqzcool::{scattering_rates, OmParams, OmSystem, Spring, SqueezedDrive};
use toml::{Spanned, Value};

use crate::error::CliError;
use crate::format::Format;

const RATE_UNITS: [(&str, f64); 5] =
    [("_rad_s", 1.0), ("_hz", TAU), ("_khz", TAU * 1e3), ("_mhz", TAU * 1e6), ("_ghz", TAU * 1e9)];
const COUPLING_ITERATIONS: usize = 100;

type Entries = BTreeMap<String, Spanned<Value>>;

/// Source text plus path, for turning byte spans into line numbers.
struct Source<'a> {
    path: String,
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn error(&self, key: impl Into<String>, offset: usize, message: impl Into<String>) -> CliError {
        CliError::Config { path: self.path.clone(), key: key.into(), line: self.line(offset), message: message.into() }
    }
}

/// One `[section]`; remembers which keys were read so leftovers can be reported.
pub struct Section<'a> {
    name: String,
    start: usize,
    entries: Entries,
    used: RefCell<BTreeSet<String>>,
    src: &'a Source<'a>,
}

impl<'a> Section<'a> {
    fn qualified(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn err(&self, key: &str, message: impl Into<String>) -> CliError {
        let offset = self.entries.get(key).map_or(self.start, |v| v.span().start);
        self.src.error(self.qualified(key), offset, message)
    }

    fn missing(&self, key: &str) -> CliError {
        self.src.error(self.qualified(key), self.start, "required key is missing")
    }

    fn raw(&self, key: &str) -> Option<&Spanned<Value>> {
        let v = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v)
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn number(&self, key: &str, v: &Value) -> Result<f64, CliError> {
        match v {
            Value::Float(x) => Ok(*x),
            Value::Integer(i) => Ok(*i as f64),
            other => Err(self.err(key, format!("expected a number, found {}", other.type_str()))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key).map(|v| self.number(key, v.get_ref())).transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, CliError> {
        self.f64(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.raw(key).map(|v| v.get_ref()) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(self.err(key, "expected a non-negative integer")),
        }
    }

    pub fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.raw(key).map(|v| v.get_ref()) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(self.err(key, format!("expected a string, found {}", other.type_str()))),
        }
    }

    /// A string restricted to `choices`.
    pub fn choice(&self, key: &str, choices: &[&str], default: &str) -> Result<String, CliError> {
        let s = self.string(key)?.unwrap_or_else(|| default.to_string());
        if choices.contains(&s.as_str()) {
            Ok(s)
        } else {
            Err(self.err(key, format!("expected one of {}, got `{s}`", choices.join(", "))))
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.raw(key).map(|v| v.get_ref()) {
            None => Ok(None),
            Some(Value::Array(items)) => items.iter().map(|v| self.number(key, v)).collect::<Result<_, _>>().map(Some),
            Some(v) => Ok(Some(vec![self.number(key, v)?])),
        }
    }

    /// An axis: a number, an array of numbers, or `{ start, stop, count }`.
    pub fn axis(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let axis = match v.get_ref() {
            Value::Table(t) => {
                let known = ["start", "stop", "count", "scale"];
                if let Some(k) = t.keys().find(|k| !known.contains(&k.as_str())) {
                    return Err(self.err(key, format!("unknown axis field `{k}`, expected start, stop, count, scale")));
                }
                let field = |f: &str| -> Result<&Value, CliError> {
                    t.get(f).ok_or_else(|| self.err(key, format!("axis needs `{f}`")))
                };
                let start = self.number(key, field("start")?)?;
                let stop = self.number(key, field("stop")?)?;
                let count = match field("count")? {
                    Value::Integer(n) if *n >= 1 => *n as usize,
                    _ => return Err(self.err(key, "axis `count` must be a positive integer")),
                };
                let log = match t.get("scale").map(|v| v.as_str()) {
                    None | Some(Some("linear")) => false,
                    Some(Some("log")) => true,
                    _ => return Err(self.err(key, "axis `scale` must be \"linear\" or \"log\"")),
                };
                if log && !(start > 0.0 && stop > 0.0) {
                    return Err(self.err(key, "a log axis needs positive bounds"));
                }
                linspace(start, stop, count, log)
            }
            Value::Array(items) => items.iter().map(|v| self.number(key, v)).collect::<Result<_, _>>()?,
            other => vec![self.number(key, other)?],
        };
        if axis.is_empty() {
            return Err(self.err(key, "axis is empty"));
        }
        if axis.iter().any(|x| !x.is_finite()) {
            return Err(self.err(key, "axis values must be finite"));
        }
        Ok(Some(axis))
    }

    /// A rate given under exactly one unit-suffixed key `base<suffix>`, in rad/s.
    pub fn rate(&self, base: &str) -> Result<Option<f64>, CliError> {
        let present: Vec<(String, f64)> =
            RATE_UNITS.iter().map(|(s, f)| (format!("{base}{s}"), *f)).filter(|(k, _)| self.has(k)).collect();
        match present.as_slice() {
            [] => {
                let numeric =
                    self.entries.get(base).is_some_and(|v| matches!(v.get_ref(), Value::Integer(_) | Value::Float(_)));
                if numeric {
                    Err(self.err(base, format!("missing unit: write `{base}_mhz`, `{base}_khz`, `{base}_hz`, `{base}_ghz` or `{base}_rad_s`")))
                } else {
                    Ok(None)
                }
            }
            [(key, factor)] => Ok(Some(self.require_f64(key)? * factor)),
            [_, (key, _), ..] => Err(self.err(key, format!("`{base}` is given more than once"))),
        }
    }

    pub fn require_rate(&self, base: &str) -> Result<f64, CliError> {
        self.rate(base)?.ok_or_else(|| {
            self.src.error(self.qualified(&format!("{base}_<unit>")), self.start, "required key is missing")
        })
    }

    /// Errors on the first key nobody asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        match self.entries.iter().filter(|(k, _)| !used.contains(*k)).min_by_key(|(_, v)| v.span().start) {
            Some((k, _)) => Err(self.err(k, "unknown key")),
            None => Ok(()),
        }
    }
}

pub fn linspace(start: f64, stop: f64, count: usize, log: bool) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            if log {
                (start.ln() + t * (stop.ln() - start.ln())).exp()
            } else {
                start + t * (stop - start)
            }
        })
        .collect()
}

/// Drive phase as written in the config.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Branch(Branch),
    Radians(f64),
}

impl Phase {
    pub fn resolve(&self, sys: &OmSystem) -> f64 {
        match *self {
            Phase::Branch(b) => b.phase(sys),
            Phase::Radians(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "parameterization", rename_all = "snake_case")]
pub enum DriveSpec {
    Coherent,
    State { r: f64, n_l: f64, theta: Phase },
    Loss { r_in: f64, eta_in: f64, theta: Phase },
}

impl DriveSpec {
    pub fn drive(&self, sys: &OmSystem) -> Result<SqueezedDrive, sqzcool::Error> {
        match *self {
            DriveSpec::Coherent => Ok(SqueezedDrive::coherent()),
            DriveSpec::State { r, n_l, theta } => SqueezedDrive::new(r, n_l, theta.resolve(sys)),
            DriveSpec::Loss { r_in, eta_in, theta } => SqueezedDrive::from_loss(r_in, eta_in, theta.resolve(sys)),
        }
    }

    pub fn phase(&self) -> Phase {
        match *self {
            DriveSpec::Coherent => Phase::Branch(Branch::Theta0),
            DriveSpec::State { theta, .. } | DriveSpec::Loss { theta, .. } => theta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig {
    pub kappa_over_omega: Vec<f64>,
    pub delta_over_omega: Vec<f64>,
    pub r: Vec<f64>,
    pub n_l: f64,
    /// κ/Ω of the line-cut file, if requested.
    pub line_cut_kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectraConfig {
    pub mode: String,
    pub delta_over_omega: Vec<f64>,
    pub sidebands: Vec<f64>,
    pub theta_offsets: Vec<f64>,
    pub r: Vec<f64>,
    pub angles: Vec<f64>,
    pub detuning: String,
    pub hold: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolcurveConfig {
    pub r_in: Vec<f64>,
    pub eta_in: f64,
    pub band: Option<(f64, f64)>,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitInput {
    pub path: PathBuf,
    pub sideband: String,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub inputs: Vec<FitInput>,
    pub window_linewidths: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub path: PathBuf,
    pub system: OmSystem,
    pub drive: DriveSpec,
    pub eta_det: f64,
    pub map: Option<MapConfig>,
    pub spectra: Option<SpectraConfig>,
    pub coolcurve: Option<CoolcurveConfig>,
    pub fit: Option<FitConfig>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

pub const SECTIONS: [&str; 8] = ["system", "drive", "detection", "map", "spectra", "coolcurve", "fit", "output"];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let src = Source { path: path.display().to_string(), text };
        let doc: BTreeMap<String, Spanned<Entries>> = toml::from_str(text).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            src.error("<document>", offset, e.message().trim().to_string())
        })?;
        let mut sections = BTreeMap::new();
        for (name, value) in doc {
            let start = value.span().start;
            if !SECTIONS.contains(&name.as_str()) {
                return Err(src.error(
                    name,
                    start,
                    format!("unknown section, expected one of {}", SECTIONS.join(", ")),
                ));
            }
            let entries = value.into_inner();
            sections
                .insert(name.clone(), Section { name, start, entries, used: RefCell::new(BTreeSet::new()), src: &src });
        }

        let empty = Section {
            name: String::new(),
            start: 0,
            entries: Entries::new(),
            used: RefCell::new(BTreeSet::new()),
            src: &src,
        };
        let get = |n: &str| sections.get(n);
        let system_section = get("system").ok_or_else(|| src.error("system", 0, "missing [system] section"))?;
        let system = parse_system(system_section)?;
        let drive = match get("drive") {
            Some(s) => parse_drive(s)?,
            None => DriveSpec::Coherent,
        };
        let eta_det = match get("detection") {
            Some(s) => parse_detection(s, &system)?,
            None => 1.0,
        };
        let map = get("map").map(parse_map).transpose()?;
        let spectra = get("spectra").map(parse_spectra).transpose()?;
        let coolcurve = get("coolcurve").map(parse_coolcurve).transpose()?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fit = get("fit").map(|s| parse_fit(s, base)).transpose()?;
        let output = get("output").unwrap_or(&empty);
        let out_dir = output.string("dir")?.map(|d| base.join(d));
        let format = match output.string("format")?.as_deref() {
            None => None,
            Some("csv") => Some(Format::Csv),
            Some("json") => Some(Format::Json),
            Some(other) => return Err(output.err("format", format!("expected csv or json, got `{other}`"))),
        };
        for s in sections.values() {
            s.finish()?;
        }
        Ok(RunConfig {
            path: path.to_path_buf(),
            system,
            drive,
            eta_det,
            map,
            spectra,
            coolcurve,
            fit,
            out_dir,
            format,
        })
    }
}

fn positive(s: &Section, key: &str, x: f64, allow_zero: bool) -> Result<f64, CliError> {
    if x.is_finite() && (x > 0.0 || (allow_zero && x == 0.0)) {
        Ok(x)
    } else {
        Err(s.err(key, format!("must be {}, got {x}", if allow_zero { "finite and >= 0" } else { "finite and > 0" })))
    }
}

fn rate_key(s: &Section, base: &str) -> String {
    RATE_UNITS.iter().map(|(u, _)| format!("{base}{u}")).find(|k| s.has(k)).unwrap_or_else(|| base.to_string())
}

fn parse_system(s: &Section) -> Result<OmSystem, CliError> {
    let kappa_ext = s.require_rate("kappa_ext")?;
    let kappa_0 = s.rate("kappa_0")?.unwrap_or(0.0);
    let omega_m = s.require_rate("omega_m")?;
    let gamma_m = s.rate("gamma_m")?.unwrap_or(0.0);
    positive(s, &rate_key(s, "kappa_ext"), kappa_ext, true)?;
    positive(s, &rate_key(s, "kappa_0"), kappa_0, true)?;
    positive(s, &rate_key(s, "omega_m"), omega_m, false)?;
    positive(s, &rate_key(s, "gamma_m"), gamma_m, true)?;
    let n_th = positive(s, "n_th", s.f64_or("n_th", 0.0)?, true)?;
    let omega_c = s.rate("omega_c")?;
    let g0 = s.rate("g0")?;
    let spring = match s.choice("spring", &["on", "off"], "off")?.as_str() {
        "on" => Spring::On,
        _ => Spring::Off,
    };

    let g = s.rate("g")?;
    let cooperativity = s.f64("cooperativity")?;
    let gamma_opt = s.rate("gamma_opt")?;
    let given = [g.is_some(), cooperativity.is_some(), gamma_opt.is_some()].iter().filter(|&&b| b).count();
    if given != 1 {
        return Err(s.err("g", "give exactly one of g_<unit>, cooperativity, gamma_opt_<unit>"));
    }

    let optimal = match s.string("delta")? {
        Some(v) if v == "optimal" => true,
        Some(v) => return Err(s.err("delta", format!("expected \"optimal\" or a unit-suffixed rate, got `{v}`"))),
        None => false,
    };
    let delta = match s.rate("delta")? {
        Some(d) if optimal => {
            return Err(s.err(&rate_key(s, "delta"), format!("detuning given twice ({d} rad/s and \"optimal\")")))
        }
        Some(d) => d,
        None if optimal => -omega_m,
        None => return Err(s.err("delta", "required: delta = \"optimal\" or delta_<unit>")),
    };

    let g_start = match (g, cooperativity) {
        (Some(g), _) => positive(s, &rate_key(s, "g"), g, true)?,
        (None, Some(c)) => {
            positive(s, "cooperativity", c, true)?;
            (c * (kappa_ext + kappa_0) * gamma_m / 4.0).sqrt()
        }
        (None, None) => 0.0,
    };
    let params = OmParams { kappa_ext, kappa_0, omega_m, gamma_m, g: g_start, delta, n_th, omega_c, g0, spring };
    let key = s.entries.keys().next().cloned().unwrap_or_default();
    let locate = |e: sqzcool::Error| match &e {
        sqzcool::Error::InvalidParameter { name, reason } => s.err(&rate_key(s, name), reason.clone()),
        _ => s.err(&key, e.to_string()),
    };
    let mut sys = OmSystem::new(params).map_err(locate)?;
    if optimal {
        sys = sys.at_optimal_detuning().map_err(locate)?;
    }
    if let Some(target) = gamma_opt {
        let key = rate_key(s, "gamma_opt");
        positive(s, &key, target, false)?;
        sys = solve_coupling(sys, target, optimal).map_err(|e| s.err(&key, e.to_string()))?;
    }
    Ok(sys)
}

/// Coupling that produces optical damping `target` at the configured detuning.
fn solve_coupling(mut sys: OmSystem, target: f64, optimal: bool) -> Result<OmSystem, sqzcool::Error> {
    let mut g = 1.0;
    for _ in 0..COUPLING_ITERATIONS {
        sys = sys.with_g(g)?;
        if optimal {
            sys = sys.at_optimal_detuning()?;
        }
        let per_g2 = scattering_rates(&sys).gamma_opt / (g * g);
        if per_g2 <= 0.0 {
            return Err(sqzcool::Error::NotCooling { delta: sys.delta(), gamma_opt: per_g2 });
        }
        let next = (target / per_g2).sqrt();
        if (next - g).abs() <= 1e-13 * next {
            return sys.with_g(next).and_then(|s| if optimal { s.at_optimal_detuning() } else { Ok(s) });
        }
        g = next;
    }
    Err(sqzcool::Error::NoConvergence { what: "coupling from optical damping", iterations: COUPLING_ITERATIONS })
}

fn parse_phase(s: &Section) -> Result<Phase, CliError> {
    let named = s.string("theta")?;
    let rad = s.f64("theta_rad")?;
    match (named, rad) {
        (Some(_), Some(_)) => Err(s.err("theta_rad", "give either theta or theta_rad")),
        (None, Some(t)) if t.is_finite() => Ok(Phase::Radians(t)),
        (None, Some(_)) => Err(s.err("theta_rad", "must be finite")),
        (Some(n), None) => match n.as_str() {
            "theta0" => Ok(Phase::Branch(Branch::Theta0)),
            "theta0_minus_pi" => Ok(Phase::Branch(Branch::Theta0MinusPi)),
            other => Err(s.err("theta", format!("expected theta0 or theta0_minus_pi, got `{other}`"))),
        },
        (None, None) => Ok(Phase::Branch(Branch::Theta0)),
    }
}

/// `name` or `name_db` (squeezing in dB of variance, either sign).
fn squeezing(s: &Section, name: &str) -> Result<Option<f64>, CliError> {
    let db_key = format!("{name}_db");
    match (s.f64(name)?, s.f64(&db_key)?) {
        (Some(_), Some(_)) => Err(s.err(&db_key, format!("give either {name} or {db_key}"))),
        (Some(r), None) => positive(s, name, r, true).map(Some),
        (None, Some(db)) => Ok(Some(r_from_db(db))),
        (None, None) => Ok(None),
    }
}

fn parse_drive(s: &Section) -> Result<DriveSpec, CliError> {
    let theta = parse_phase(s)?;
    let state = squeezing(s, "r")?;
    let loss = squeezing(s, "r_in")?;
    let n_l = s.f64("n_l")?;
    let eta_in = s.f64("eta_in")?;
    match (state, loss) {
        (Some(_), Some(_)) => Err(s.err("r_in", "give either (r, n_l) or (r_in, eta_in), not both")),
        (Some(r), None) => {
            if eta_in.is_some() {
                return Err(s.err("eta_in", "eta_in belongs to the (r_in, eta_in) form"));
            }
            let n_l = positive(s, "n_l", n_l.unwrap_or(0.0), true)?;
            Ok(DriveSpec::State { r, n_l, theta })
        }
        (None, Some(r_in)) => {
            if n_l.is_some() {
                return Err(s.err("n_l", "n_l belongs to the (r, n_l) form"));
            }
            let eta_in = s.f64("eta_in")?.ok_or_else(|| s.missing("eta_in"))?;
            if !(0.0..=1.0).contains(&eta_in) {
                return Err(s.err("eta_in", format!("must lie in [0, 1], got {eta_in}")));
            }
            Ok(DriveSpec::Loss { r_in, eta_in, theta })
        }
        (None, None) => {
            if n_l.is_some() || eta_in.is_some() {
                return Err(s.err(if n_l.is_some() { "n_l" } else { "eta_in" }, "drive needs r or r_in"));
            }
            Ok(DriveSpec::Coherent)
        }
    }
}

fn parse_detection(s: &Section, sys: &OmSystem) -> Result<f64, CliError> {
    let eta = s.f64("eta_det")?;
    let t_n = s.f64("t_n_k")?;
    let omega_c = s.rate("omega_c")?.or(sys.omega_c());
    match (eta, t_n) {
        (Some(_), Some(_)) => Err(s.err("t_n_k", "give either eta_det or (omega_c, t_n_k)")),
        (Some(e), None) if e > 0.0 && e <= 1.0 => Ok(e),
        (Some(e), None) => Err(s.err("eta_det", format!("must lie in (0, 1], got {e}"))),
        (None, Some(t)) => {
            let omega_c =
                omega_c.ok_or_else(|| s.err("t_n_k", "noise temperature needs omega_c_<unit> here or in [system]"))?;
            detection_efficiency(omega_c, t).map_err(|e| s.err("t_n_k", e.to_string()))
        }
        (None, None) => Ok(1.0),
    }
}

fn parse_map(s: &Section) -> Result<MapConfig, CliError> {
    let kappa_over_omega = s.axis("kappa_over_omega")?.unwrap_or_else(|| linspace(0.1, 10.0, 200, true));
    let delta_over_omega = s.axis("delta_over_omega")?.unwrap_or_else(|| linspace(-10.0, -0.1, 200, false));
    if kappa_over_omega.iter().any(|&k| k <= 0.0) {
        return Err(s.err("kappa_over_omega", "values must be > 0"));
    }
    let r = match (s.f64_list("r")?, s.f64_list("r_db")?) {
        (Some(_), Some(_)) => return Err(s.err("r_db", "give either r or r_db")),
        (Some(r), None) => r,
        (None, Some(db)) => db.into_iter().map(r_from_db).collect(),
        (None, None) => vec![0.0],
    };
    if r.iter().any(|&x| !(x >= 0.0)) {
        return Err(s.err("r", "squeezing must be >= 0"));
    }
    let n_l = positive(s, "n_l", s.f64_or("n_l", 0.0)?, true)?;
    let line_cut_kappa = s.f64("line_cut_kappa_over_omega")?;
    if let Some(k) = line_cut_kappa {
        positive(s, "line_cut_kappa_over_omega", k, false)?;
    }
    Ok(MapConfig { kappa_over_omega, delta_over_omega, r, n_l, line_cut_kappa })
}

fn parse_spectra(s: &Section) -> Result<SpectraConfig, CliError> {
    let mode = s.choice("mode", &crate::commands::spectra::MODE_NAMES, "single")?;
    let delta_over_omega = s.axis("delta_over_omega")?.unwrap_or_else(|| linspace(0.8, 1.2, 2001, false));
    if delta_over_omega.iter().any(|&d| d <= 0.0) {
        return Err(s.err("delta_over_omega", "give the upper-sideband window (> 0); the lower one is mirrored"));
    }
    let sidebands = match s.choice("sidebands", &["both", "upper", "lower"], "both")?.as_str() {
        "upper" => vec![1.0],
        "lower" => vec![-1.0],
        _ => vec![1.0, -1.0],
    };
    Ok(SpectraConfig {
        mode,
        delta_over_omega,
        sidebands,
        theta_offsets: s.f64_list("theta_offsets_rad")?.unwrap_or_default(),
        r: s.f64_list("r")?.unwrap_or_default(),
        angles: s.f64_list("angles_rad")?.unwrap_or_default(),
        detuning: s.choice("detuning", &["fixed", "bifurcated"], "fixed")?,
        hold: s.choice("hold", &["cooperativity", "gamma_opt"], "cooperativity")?,
    })
}

fn parse_coolcurve(s: &Section) -> Result<CoolcurveConfig, CliError> {
    let r_in = match (s.axis("r_in")?, s.axis("r_in_db")?) {
        (Some(_), Some(_)) => return Err(s.err("r_in_db", "give either r_in or r_in_db")),
        (Some(r), None) => r,
        (None, Some(db)) => db.into_iter().map(r_from_db).collect(),
        (None, None) => linspace(0.0, 1.0, 101, false),
    };
    if r_in.iter().any(|&r| r < 0.0) {
        return Err(s.err("r_in", "squeezing must be >= 0"));
    }
    let eta_in = s.f64_or("eta_in", 1.0)?;
    if !(0.0..=1.0).contains(&eta_in) {
        return Err(s.err("eta_in", format!("must lie in [0, 1], got {eta_in}")));
    }
    let band = match s.f64_list("eta_in_band")? {
        None => None,
        Some(v) if v.len() == 2 && v.iter().all(|e| (0.0..=1.0).contains(e)) && v[0] <= v[1] => Some((v[0], v[1])),
        Some(_) => return Err(s.err("eta_in_band", "expected [low, high] within [0, 1]")),
    };
    let names = sqzcool::cooling::OccupancyRegistry::default().names();
    let model = s.choice("model", &names, "closed-form")?;
    Ok(CoolcurveConfig { r_in, eta_in, band, model })
}

fn parse_fit(s: &Section, base: &Path) -> Result<FitConfig, CliError> {
    let mut inputs = Vec::new();
    for (key, sideband, branch) in [
        ("upper_theta0", "upper", Branch::Theta0),
        ("upper_theta0_minus_pi", "upper", Branch::Theta0MinusPi),
        ("lower_theta0", "lower", Branch::Theta0),
        ("lower_theta0_minus_pi", "lower", Branch::Theta0MinusPi),
    ] {
        if let Some(p) = s.string(key)? {
            inputs.push(FitInput { path: base.join(p), sideband: sideband.into(), branch });
        }
    }
    let window_linewidths = positive(s, "window_linewidths", s.f64_or("window_linewidths", 10.0)?, false)?;
    Ok(FitConfig { inputs, window_linewidths })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[system]\nkappa_ext_mhz = 27.0\nomega_m_mhz = 10.1\ngamma_m_hz = 15\nn_th = 75\ngamma_opt_khz = 36\ndelta = \"optimal\"\n";

    fn parse(text: &str) -> Result<RunConfig, CliError> {
        RunConfig::parse(text, Path::new("test.toml"))
    }

    fn config_error(text: &str) -> (String, usize, String) {
        match parse(text) {
            Err(CliError::Config { key, line, message, .. }) => (key, line, message),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn device_style_system() {
        let c = parse(BASE).unwrap();
        let rates = scattering_rates(&c.system);
        assert!((rates.gamma_opt / (TAU * 36e3) - 1.0).abs() < 1e-10);
        assert!((c.system.kappa() - TAU * 27e6).abs() < 1e-3);
        assert_eq!(c.drive, DriveSpec::Coherent);
        assert_eq!(c.eta_det, 1.0);
    }

    #[test]
    fn spring_shift_at_device_point() {
        let c = parse(&format!("{BASE}spring = \"on\"\n")).unwrap();
        let shift = 1.0 - c.system.omega_eff() / c.system.omega_m();
        assert!(shift > 1e-3 && shift < 1e-2, "{shift}");
        assert!((shift - 0.0024).abs() < 1e-4, "{shift}");
    }

    #[test]
    fn unknown_key_names_line_and_key() {
        let (key, line, msg) = config_error(&format!("{BASE}\n[drive]\nr = 0.3\nn_l = 0.07\nsqueeze = 1\n"));
        assert_eq!((key.as_str(), line, msg.as_str()), ("drive.squeeze", 12, "unknown key"));
    }

    #[test]
    fn unitless_rate_is_rejected() {
        let (key, line, msg) =
            config_error("[system]\nkappa_ext = 27.0\nomega_m_mhz = 10.1\ng_khz = 1\ndelta = \"optimal\"\n");
        assert_eq!((key.as_str(), line), ("system.kappa_ext", 2));
        assert!(msg.contains("missing unit"), "{msg}");
    }

    #[test]
    fn drive_forms_are_exclusive() {
        let (key, ..) = config_error(&format!("{BASE}[drive]\nr = 0.3\nr_in = 0.5\neta_in = 0.57\n"));
        assert_eq!(key, "drive.r_in");
        let c =
            parse(&format!("{BASE}[drive]\nr_in_db = -4.62\neta_in = 0.57\ntheta = \"theta0_minus_pi\"\n")).unwrap();
        assert!(matches!(c.drive, DriveSpec::Loss { theta: Phase::Branch(Branch::Theta0MinusPi), .. }));
    }

    #[test]
    fn detection_from_noise_temperature() {
        let c = parse(&format!("{BASE}omega_c_ghz = 6.4\n[detection]\nt_n_k = 4.6\n")).unwrap();
        assert!(c.eta_det > 0.05 && c.eta_det < 0.08, "{}", c.eta_det);
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let (key, line, _) = config_error("[system]\nkappa_ext_mhz = = 2\n");
        assert_eq!((key.as_str(), line), ("<document>", 2));
    }

    #[test]
    fn unknown_section() {
        let (key, line, _) = config_error(&format!("{BASE}[sweep]\nx = 1\n"));
        assert_eq!((key.as_str(), line), ("sweep", 8));
    }

    #[test]
    fn axes() {
        let c = parse(&format!(
            "{BASE}[map]\nkappa_over_omega = {{ start = 0.1, stop = 10, count = 3, scale = \"log\" }}\ndelta_over_omega = -1.68\nr_db = [0, -2.5]\n"
        ))
        .unwrap();
        let m = c.map.unwrap();
        assert_eq!(m.delta_over_omega, vec![-1.68]);
        assert!((m.kappa_over_omega[1] - 1.0).abs() < 1e-15);
        assert_eq!(m.r.len(), 2);
        let (key, ..) = config_error(&format!("{BASE}[map]\nkappa_over_omega = {{ start = 1, stop = 2 }}\n"));
        assert_eq!(key, "map.kappa_over_omega");
    }
}
