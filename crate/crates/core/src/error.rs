use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no point of the domain passed the inside test")]
    EmptyDomain,
    #[error("spacing {h} leaves no room for interior nodes")]
    SpacingTooLarge { h: f64 },
    #[error("invalid spacing {h}: must satisfy 0 < h < diameter")]
    InvalidSpacing { h: f64 },
    #[error("node set is empty")]
    EmptyNodeSet,

    #[error("monomial degree {degree} exceeds the supported maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("moment system is rank deficient (residual {residual:.3e})")]
    RankDeficient { residual: f64 },
    #[error("no nonnegative weights satisfy the moment equations (residual {residual:.3e})")]
    InfeasibleNonnegative { residual: f64 },
    #[error("order not measurable: error {error:.3e} at level {level} is below 1e-14")]
    ZeroError { level: usize, error: f64 },
    #[error("need at least {needed} refinement levels, got {got}")]
    TooFewLevels { needed: usize, got: usize },
    #[error("EOC inputs must be positive")]
    NonpositiveInput,

    #[error("too few solution nodes near ({x}, {y}) for a degree-{degree} fit")]
    InsufficientLocalNodes { x: f64, y: f64, degree: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("kernel standard deviation must be positive, got {0}")]
    NonpositiveSigma(f64),
    #[error("kernel has no radial profile")]
    NotRadial,
    #[error("kernel profile does not decay below the tolerance")]
    NoDecay,

    #[error("lambda must be nonzero")]
    ZeroLambda,
    #[error("reconstruction target nodes differ from the quadrature nodes")]
    NodeMismatch,
    #[error("matrix is singular to working precision (pivot {pivot:.3e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Newton Jacobian is singular")]
    SingularJacobian,

    #[error("scaling function s(x) is not strictly positive (min {min:.3e})")]
    NonpositiveS { min: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    /// Numerical breakdowns as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. }
                | Error::NoConvergence { .. }
                | Error::SingularJacobian
                | Error::RankDeficient { .. }
                | Error::InfeasibleNonnegative { .. }
                | Error::InsufficientLocalNodes { .. }
                | Error::ZeroError { .. }
        )
    }
}
