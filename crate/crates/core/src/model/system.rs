use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance of the optical-spring and optimal-detuning fixed points.
pub const SPRING_TOLERANCE: f64 = 1e-10;
/// Iteration cap of the optical-spring and optimal-detuning fixed points.
pub const SPRING_MAX_ITERATIONS: usize = 100;
const SPRING_DAMPING: f64 = 0.5;

/// Whether closed-form expressions use the spring-shifted mechanical frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spring {
    On,
    #[default]
    Off,
}

/// Raw device parameters. All rates are angular (rad/s); the detuning is signed
/// with red detuning negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmParams {
    pub kappa_ext: f64,
    pub kappa_0: f64,
    pub omega_m: f64,
    pub gamma_m: f64,
    pub g: f64,
    pub delta: f64,
    pub n_th: f64,
    #[serde(default)]
    pub omega_c: Option<f64>,
    /// Vacuum coupling rate, provenance only.
    #[serde(default)]
    pub g0: Option<f64>,
    #[serde(default)]
    pub spring: Spring,
}

impl OmParams {
    /// Normalized-unit system (Ω = 1) with a lossless, overcoupled cavity.
    pub fn normalized(kappa: f64, delta: f64, g: f64) -> Self {
        OmParams {
            kappa_ext: kappa,
            kappa_0: 0.0,
            omega_m: 1.0,
            gamma_m: 1e-9,
            g,
            delta,
            n_th: 0.0,
            omega_c: None,
            g0: None,
            spring: Spring::Off,
        }
    }
}

/// A validated optomechanical device plus drive detuning.
///
/// Construction resolves the optical spring once, so every derived quantity
/// afterwards is an infallible function of the stored values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmSystem {
    #[serde(flatten)]
    params: OmParams,
    omega_tot: f64,
}

impl OmSystem {
    pub fn new(params: OmParams) -> Result<Self> {
        validate(&params)?;
        let omega_tot = match params.spring {
            Spring::On => {
                spring_fixed_point(params.kappa_ext + params.kappa_0, params.omega_m, params.delta, params.g)?
            }
            Spring::Off => params.omega_m,
        };
        Ok(OmSystem { params, omega_tot })
    }

    pub fn params(&self) -> &OmParams {
        &self.params
    }

    pub fn kappa(&self) -> f64 {
        self.params.kappa_ext + self.params.kappa_0
    }

    pub fn kappa_ext(&self) -> f64 {
        self.params.kappa_ext
    }

    pub fn kappa_0(&self) -> f64 {
        self.params.kappa_0
    }

    /// Cavity coupling efficiency κ_ext/κ.
    pub fn eta(&self) -> f64 {
        self.params.kappa_ext / self.kappa()
    }

    /// Bare mechanical frequency Ω.
    pub fn omega_m(&self) -> f64 {
        self.params.omega_m
    }

    /// Mechanical frequency used by the closed forms: Ω_tot with the spring
    /// switched on, Ω otherwise.
    pub fn omega_eff(&self) -> f64 {
        self.omega_tot
    }

    pub fn gamma_m(&self) -> f64 {
        self.params.gamma_m
    }

    pub fn g(&self) -> f64 {
        self.params.g
    }

    pub fn delta(&self) -> f64 {
        self.params.delta
    }

    pub fn n_th(&self) -> f64 {
        self.params.n_th
    }

    pub fn omega_c(&self) -> Option<f64> {
        self.params.omega_c
    }

    pub fn spring(&self) -> Spring {
        self.params.spring
    }

    /// C = 4g²/(κΓ).
    pub fn cooperativity(&self) -> f64 {
        4.0 * self.params.g * self.params.g / (self.kappa() * self.params.gamma_m)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        OmSystem::new(OmParams { delta, ..self.params })
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        OmSystem::new(OmParams { g, ..self.params })
    }

    pub fn with_thermal(&self, gamma_m: f64, n_th: f64) -> Result<Self> {
        OmSystem::new(OmParams { gamma_m, n_th, ..self.params })
    }

    pub fn with_spring(&self, spring: Spring) -> Result<Self> {
        OmSystem::new(OmParams { spring, ..self.params })
    }

    /// Same device driven at the optimal coherent-state detuning Δ₀.
    pub fn at_optimal_detuning(&self) -> Result<Self> {
        self.with_delta(optimal_detuning(self)?)
    }
}

fn validate(p: &OmParams) -> Result<()> {
    let finite = [
        ("kappa_ext", p.kappa_ext),
        ("kappa_0", p.kappa_0),
        ("omega_m", p.omega_m),
        ("gamma_m", p.gamma_m),
        ("g", p.g),
        ("delta", p.delta),
        ("n_th", p.n_th),
    ];
    for (name, v) in finite {
        if !v.is_finite() {
            return Err(Error::invalid(name, format!("must be finite, got {v}")));
        }
    }
    if p.kappa_ext < 0.0 {
        return Err(Error::invalid("kappa_ext", "must be >= 0"));
    }
    if p.kappa_0 < 0.0 {
        return Err(Error::invalid("kappa_0", "must be >= 0"));
    }
    if p.kappa_ext + p.kappa_0 <= 0.0 {
        return Err(Error::invalid("kappa_ext", "total linewidth kappa_ext + kappa_0 must be > 0"));
    }
    if p.kappa_ext == 0.0 {
        return Err(Error::invalid("kappa_ext", "the drive port must couple to the cavity"));
    }
    if p.omega_m <= 0.0 {
        return Err(Error::invalid("omega_m", "must be > 0"));
    }
    if p.gamma_m <= 0.0 {
        return Err(Error::invalid("gamma_m", "must be > 0"));
    }
    if p.g < 0.0 {
        return Err(Error::invalid("g", "must be >= 0"));
    }
    if p.n_th < 0.0 {
        return Err(Error::invalid("n_th", "must be >= 0"));
    }
    Ok(())
}

/// Bracketed spring response evaluated at mechanical frequency `omega`.
fn spring_shift(kappa: f64, delta: f64, g: f64, omega: f64) -> f64 {
    let q = kappa * kappa / 4.0;
    let lo = delta - omega;
    let hi = delta + omega;
    g * g * (lo / (q + lo * lo) + hi / (q + hi * hi))
}

pub(crate) fn spring_fixed_point(kappa: f64, omega: f64, delta: f64, g: f64) -> Result<f64> {
    if g == 0.0 {
        return Ok(omega);
    }
    let mut x = omega;
    for _ in 0..SPRING_MAX_ITERATIONS {
        let target = omega + spring_shift(kappa, delta, g, x);
        let next = x + SPRING_DAMPING * (target - x);
        if !(next > 0.0) {
            break;
        }
        if (next - x).abs() <= SPRING_TOLERANCE * next.abs() {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence { what: "optical spring fixed point", iterations: SPRING_MAX_ITERATIONS })
}

/// Spring-shifted mechanical frequency Ω_tot, regardless of the system's spring switch.
pub fn optical_spring(sys: &OmSystem) -> Result<f64> {
    spring_fixed_point(sys.kappa(), sys.omega_m(), sys.delta(), sys.g())
}

/// Optimal coherent-state detuning Δ₀ = −½√(κ² + 4Ω_tot²).
///
/// With the spring switched on, Ω_tot depends on the detuning itself and the
/// pair is resolved by damped fixed-point iteration.
pub fn optimal_detuning(sys: &OmSystem) -> Result<f64> {
    let kappa = sys.kappa();
    let closed = |omega: f64| -0.5 * (kappa * kappa + 4.0 * omega * omega).sqrt();
    match sys.spring() {
        Spring::Off => Ok(closed(sys.omega_m())),
        Spring::On => {
            let mut delta = closed(sys.omega_m());
            for _ in 0..SPRING_MAX_ITERATIONS {
                let omega_tot = spring_fixed_point(kappa, sys.omega_m(), delta, sys.g())?;
                let next = delta + SPRING_DAMPING * (closed(omega_tot) - delta);
                if (next - delta).abs() <= SPRING_TOLERANCE * next.abs() {
                    return Ok(next);
                }
                delta = next;
            }
            Err(Error::NoConvergence { what: "optimal detuning fixed point", iterations: SPRING_MAX_ITERATIONS })
        }
    }
}
