//! Crate-wide error type.

use thiserror::Error;

/// Alias for results returned by this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by parameter validation and the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Two decay parameters are too close to treat as distinct.
    #[error("decay parameters {i} and {j} are separated by only {gap:e}")]
    DuplicateDecay { i: usize, j: usize, gap: f64 },

    /// Vector lengths that must agree do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// All polynomial coefficients are below the degeneracy threshold.
    #[error("polynomial is zero (or constant) and has no roots to find")]
    ZeroPolynomial,

    /// A companion eigenvalue has a non-negligible imaginary part.
    #[error("complex eigenvalue {re} + {im}i exceeds the imaginary tolerance")]
    ComplexRoots { re: f64, im: f64 },

    /// The QR iteration did not deflate every eigenvalue within the cap.
    #[error("eigenvalue iteration exceeded {0} steps without converging")]
    NoConvergence(usize),

    /// Doubling the outer bracket endpoint never produced a sign change.
    #[error("no sign change found for the outer root bracket after {0} expansions")]
    BracketFailure(usize),

    /// Two computed roots are closer than the separation threshold.
    #[error("roots {i} and {j} are separated by only {gap:e}")]
    CloseRoots { i: usize, j: usize, gap: f64 },

    /// Parameter inversion failed; carries the underlying root-finding error.
    #[error("parameter inversion failed: {0}")]
    InversionFailure(#[source] Box<Error>),

    /// Parameters violate the strict validity constraints.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Decay vectors violate the pairwise-separation preconditions.
    #[error("degenerate decay parameters: {0}")]
    DegenerateDecays(String),

    /// The interlacing chain is broken.
    #[error("interlacing violated at position {position}: {detail}")]
    InterlacingViolation { position: usize, detail: String },

    /// An inverse decay parameter is exactly zero where a nonzero one is required.
    #[error("inverse decay parameter {index} is zero")]
    ZeroDecay { index: usize },

    /// A dense materialization request exceeds the configured cap.
    #[error("dense size {n} exceeds the cap of {cap}")]
    SizeLimit { n: usize, cap: usize },

    /// The workload matrix is not invertible.
    #[error("singular workload: {0}")]
    SingularWorkload(String),

    /// Differentiation requested in the regime with a zero inverse decay.
    #[error("jacobian undefined: an inverse decay parameter is zero in this regime")]
    DegenerateRegime,

    /// The derivative at a root is too small for implicit differentiation.
    #[error("near-double root: |r'(nu)| = {0:e} is below the separation threshold")]
    NearDoubleRoot(f64),

    /// A finite-difference probe left the strictly valid region.
    #[error("finite-difference step leaves the valid region at coordinate {0}")]
    PerturbationInvalid(usize),

    /// Two sequences that must have equal length do not.
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },

    /// The numerator constant term is zero, so the reciprocal series does not exist.
    #[error("numerator has zero constant coefficient; reciprocal undefined")]
    NonUnitConstant,

    /// The optimizer was started from an infeasible point.
    #[error("initial parameters are not strictly valid: {0}")]
    InitInvalid(String),

    /// The optimizer encountered a NaN or infinite objective or gradient.
    #[error("non-finite objective or gradient at iteration {iter}")]
    NonFinite { iter: usize },
}
