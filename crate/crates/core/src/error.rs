use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("light-shift ratio undefined: total light shift per intensity is zero while the differential one is not")]
    UndefinedRatio,

    #[error("energy grid needs at least 2 classes and a positive cutoff (got {n_classes} classes, cutoff {epsilon_max})")]
    Resolution { n_classes: usize, epsilon_max: f64 },

    #[error("time step {dt} s too large: dt * max rate = {product} (must stay below {limit})")]
    StepSize { dt: f64, product: f64, limit: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("singular system: {0}")]
    Singular(&'static str),

    #[error("operating point out of quadrature: |P - offset| = {deviation} exceeds {limit}")]
    OutOfQuadrature { deviation: f64, limit: f64 },

    #[error("noise source `{0}` has no sensitivity")]
    MissingSensitivity(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Precondition or physics violations, as opposed to numerical failure or
    /// missing data.
    pub fn is_physics(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::UndefinedRatio
                | Error::Resolution { .. }
                | Error::StepSize { .. }
                | Error::OutOfQuadrature { .. }
                | Error::MissingSensitivity(_)
        )
    }
}
