use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the physics layer.
///
/// Variants split into two families: input problems (a parameter outside its
/// domain) and physics outcomes (the requested regime does not exist, a solver
/// gave up). [`Error::is_physics`] tells them apart for callers that map errors
/// onto exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("bifurcated detunings do not exist for r = {r} below the critical squeezing r_c = {r_c}")]
    DiscriminantNegative { r: f64, r_c: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("drive does not cool the mechanics (detuning {delta} rad/s, optical damping {gamma_opt} rad/s)")]
    NotCooling { delta: f64, gamma_opt: f64 },

    #[error("linearized dynamics are unstable (largest growth rate {growth_rate} rad/s)")]
    Unstable { growth_rate: f64 },

    #[error("{what} did not reach the requested tolerance (estimate {estimate}, error {error})")]
    NonConvergent { what: &'static str, estimate: f64, error: f64 },

    #[error("sideband is not Lorentzian (asymmetry metric {asymmetry:.3e})")]
    NotLorentzian { asymmetry: f64 },

    #[error("squeezing phase {theta} rad is neither the cooling nor the heating phase; no closed form exists")]
    GenericPhase { theta: f64 },

    #[error("window holds {found} samples, at least {required} are needed")]
    InsufficientSamples { found: usize, required: usize },

    #[error("no physical (r >= 0, n_l >= 0) solution reproduces the measured sidebands (residual {residual:.3e})")]
    NoSolution { residual: f64 },

    #[error("state inversion is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for outcomes of the physics (instability, no cooling, no solution),
    /// false for malformed inputs.
    pub fn is_physics(&self) -> bool {
        !matches!(self, Error::InvalidParameter { .. } | Error::InsufficientSamples { .. })
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::DiscriminantNegative { .. } => "DiscriminantNegative",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NotCooling { .. } => "NotCooling",
            Error::Unstable { .. } => "Unstable",
            Error::NonConvergent { .. } => "NonConvergent",
            Error::NotLorentzian { .. } => "NotLorentzian",
            Error::GenericPhase { .. } => "GenericPhase",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::NoSolution { .. } => "NoSolution",
            Error::IllConditioned { .. } => "IllConditioned",
        }
    }
}
