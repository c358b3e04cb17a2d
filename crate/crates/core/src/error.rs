use thiserror::Error;

use crate::operators::HilbertSpace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode dimensions must both be >= 2, got ({d1}, {d2})")]
    InvalidDims { d1: usize, d2: usize },

    #[error("invalid mode index {0}, expected 1 or 2")]
    InvalidMode(usize),

    #[error("invalid Pauli axis {0:?}, expected one of x, y, z, plus, minus")]
    InvalidAxis(String),

    #[error("operators act on different spaces ({0} vs {1})")]
    SpaceMismatch(HilbertSpace, HilbertSpace),

    #[error("matrix shape {rows}x{cols} does not match dimension {expected}")]
    ShapeMismatch { expected: usize, rows: usize, cols: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("circuit parameters violate Omega1 = (lambda1/lambda2) J: residual {residual:e}")]
    InconsistentCircuit { residual: f64 },

    #[error("matrix is not Hermitian (max |H - H^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("requested {requested} eigenvalues from a {dim}-dimensional operator")]
    TooManyEigenvalues { requested: usize, dim: usize },

    #[error("Liouvillian kernel has dimension {0}, expected 1")]
    KernelMultiplicity(usize),

    #[error("steady-state solve did not converge (residual {0:e})")]
    SteadyStateResidual(f64),

    #[error("resolvent is singular at omega = {0}")]
    SingularResolvent(f64),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::KernelMultiplicity(_)
                | Error::SteadyStateResidual(_)
                | Error::SingularResolvent(_)
                | Error::NotHermitian(_)
        )
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
