use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radius {0} is outside [0, 4]")]
    OutOfRange(f64),

    #[error("mode ({n}, {m}) is not in the symmetry basis")]
    ModeNotInBasis { n: usize, m: usize },

    #[error("expected a unit vector, got length {0}")]
    NonUnitVector(f64),

    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },

    #[error("Emden function stays positive up to r = {0}")]
    NonCompactSupport(f64),

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("base state failed validation: {0}")]
    InvalidProfile(String),

    #[error("ray equation t + zeta(t y) = {target} has no root in [0, 4]")]
    RootNotBracketed { target: f64 },

    #[error("deformation left the admissible ball: |zeta|_X = {norm} >= {radius}")]
    AdmissibilityLost { norm: f64, radius: f64 },

    #[error("angular velocity {omega} is not below the cap {cap}")]
    OmegaOutOfRange { omega: f64, cap: f64 },

    #[error("(id - K_{0}) is numerically singular")]
    SingularOperator(usize),

    #[error("no convergence at omega = {omega} after {iterations} iterations (residual {residual:e})")]
    NoConvergence { omega: f64, iterations: usize, residual: f64 },

    #[error("maximum principle violated: C = {c} <= E0 + E1 = {bound}")]
    MaxPrincipleViolation { c: f64, bound: f64 },

    #[error("potential consistency check failed: max error {max_error:e}")]
    ConsistencyError { max_error: f64 },

    #[error("orbit left B4 at t = {t}")]
    OrbitEscaped { t: f64 },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::OutOfRange(_) => "out_of_range",
            Error::ModeNotInBasis { .. } => "mode_not_in_basis",
            Error::NonUnitVector(_) => "non_unit_vector",
            Error::SampleCount { .. } => "sample_count",
            Error::NonCompactSupport(_) => "non_compact_support",
            Error::Integration(_) => "integration",
            Error::InvalidProfile(_) => "invalid_profile",
            Error::RootNotBracketed { .. } => "root_not_bracketed",
            Error::AdmissibilityLost { .. } => "admissibility_lost",
            Error::OmegaOutOfRange { .. } => "omega_out_of_range",
            Error::SingularOperator(_) => "singular_operator",
            Error::NoConvergence { .. } => "no_convergence",
            Error::MaxPrincipleViolation { .. } => "max_principle_violation",
            Error::ConsistencyError { .. } => "consistency_error",
            Error::OrbitEscaped { .. } => "orbit_escaped",
            Error::Verification(_) => "verification",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
