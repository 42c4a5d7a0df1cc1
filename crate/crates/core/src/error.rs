use thiserror::Error;

/// Errors raised by the pencil, realization, Riccati and synthesis layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular pencil: det(A - zE) vanishes identically")]
    SingularPencil,
    #[error("eigenvalue reordering lost accuracy (residual {0:.3e})")]
    ReorderingFailure(f64),
    #[error("Stein equation is not uniquely solvable")]
    SteinSingular,
    #[error("center-is-pole: z0 is a generalized eigenvalue of the pencil")]
    CenterIsPole,
    #[error("deflation rank failure: non-dynamic rows of A are rank deficient")]
    DeflationRankFailure,
    #[error("evaluation at a pole")]
    EvalAtPole,
    #[error("realization centers differ")]
    CenterMismatch,
    #[error("interconnection is ill-posed")]
    IllPosed,
    #[error("invalid center: {0}")]
    InvalidCenter(String),
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("R block is singular")]
    SingularR,
    #[error("no stabilizing solution: {0}")]
    NoStabilizingSolution(String),
    #[error("open-loop pencil is not stable")]
    UnstableOpenLoop,
    #[error("system is not stable")]
    UnstableSystem,
    #[error("bisection did not converge")]
    NoConvergence,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("sign condition failed: {0}")]
    SignConditionFailed(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("parameter is not a stable contraction")]
    QNotContractive,
}

impl Error {
    /// True for failures that mean "the requested property does not hold"
    /// rather than bad input or a numerical breakdown.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::NoStabilizingSolution(_)
                | Error::SignConditionFailed(_)
                | Error::UnstableOpenLoop
                | Error::UnstableSystem
                | Error::QNotContractive
                | Error::HypothesisViolated(_)
                | Error::AssumptionViolated(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
