use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        what: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("{what}: shape mismatch, expected {expected:?}, got {found:?}")]
    ShapeMismatch {
        what: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("{what}: matrix contains NaN or infinite entries")]
    NonFinite { what: &'static str },

    #[error("{what}: matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { what: &'static str, asymmetry: f64 },

    #[error("{what}: matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite {
        what: &'static str,
        min_eigenvalue: f64,
    },

    #[error("Sylvester equation is singular: eigenvalue sum {gap:.3e} is below tolerance")]
    SpectrumOverlap { gap: f64 },

    #[error(
        "exponential map leaves the floating-point range (exponent eigenvalue {exponent:.3e})"
    )]
    ExponentOutOfRange { exponent: f64 },

    #[error("symmetric eigendecomposition did not converge")]
    EigenNoConvergence,

    #[error("linear system is singular")]
    SingularSystem,

    #[error("workspace was computed for a different point")]
    StaleWorkspace,

    #[error("reduced order r = {r} is invalid for a system of order n = {n}")]
    InvalidOrder { r: usize, n: usize },

    #[error("columns are not orthonormal (defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },

    #[error("realization is not minimal: Hankel singular value {value:.3e} at index {index} is negligible")]
    NonMinimal { index: usize, value: f64 },

    #[error("line search failed to find a decrease (step {step:.3e})")]
    LineSearchFailed { step: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("non-finite value encountered in {0}")]
    NonFiniteValue(&'static str),
}
