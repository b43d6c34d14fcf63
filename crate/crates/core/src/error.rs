use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("jet order too low: need {required}, field provides {available}")]
    JetOrderTooLow { required: usize, available: usize },

    #[error("interpolant is not curl-free: residual {0:e}")]
    CurlResidual(f64),

    #[error("interpolant violates the Cauchy-Riemann equations: residual {0:e}")]
    CauchyRiemannResidual(f64),

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("constrained block is singular: smallest scaled eigenvalue {min_eigenvalue:e}")]
    SingularConstraint { min_eigenvalue: f64 },

    #[error("conditioning value at index {index} conflicts with an existing constraint")]
    ConstraintConflict { index: usize },

    #[error("configuration is degenerate (on the large diagonal at working precision): {0}")]
    DiagonalDegeneracy(String),

    #[error("Jacobian functional at point {k} vanishes on the kernel of the evaluation map")]
    VanishingJacobianFunctional { k: usize },

    #[error("series truncation would need order {required}, above the cap {cap}")]
    TruncationCap { required: usize, cap: usize },

    #[error("too many degenerate draws: {fraction:.3} of the samples failed")]
    TooManyDegenerateDraws { fraction: f64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures caused by a configuration sitting (numerically) on
    /// the diagonal or a covariance losing rank.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite
                | Error::NotPositiveSemidefinite { .. }
                | Error::SingularConstraint { .. }
                | Error::DiagonalDegeneracy(_)
                | Error::VanishingJacobianFunctional { .. }
                | Error::TooManyDegenerateDraws { .. }
        )
    }
}
