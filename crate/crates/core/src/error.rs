use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KerrError {
    #[error("Fock cutoff n_max = {n_max} is too small for |alpha| = {alpha}: neglected tail mass {tail:.3e} exceeds {limit:.1e}")]
    Truncation {
        n_max: usize,
        alpha: f64,
        tail: f64,
        limit: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid mode index {0} (expected 1 or 2)")]
    InvalidMode(usize),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("closed-form evolution requires uncorrelated reservoirs (gamma12 = {gamma12}, d12 = {d12})")]
    UncorrelatedOnly { gamma12: f64, d12: f64 },

    #[error("closed-form path does not support this Kerr matrix: {0}")]
    UnsupportedHamiltonian(String),

    #[error("cannot split correlated rates into non-negative Lindblad terms: {0}")]
    RateDecomposition(String),

    #[error("collective mode is undefined for g1 = g2 = 0")]
    ZeroCoupling,

    #[error("degenerate detuning: |delta1| = |delta| = {0}")]
    DegenerateDetuning(f64),

    #[error("adaptive step fell to {step:.3e} at t = {time:.6}")]
    StepSizeUnderflow { step: f64, time: f64 },

    #[error("rotated-frame solution requires zero dephasing rates")]
    DephasingUnsupported,

    #[error("reservoirs are not fully correlated: gamma1*gamma2 - gamma12^2 = {0:.3e}")]
    NotFullyCorrelated(f64),

    #[error("state has population {0:.3e} outside the zero/one-photon subspace")]
    SubspaceViolation(f64),

    #[error("state has population {0:.3e} above the total photon cutoff; mode rotation would truncate it")]
    TotalNumberOverflow(f64),

    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("grid does not cover the state: Wigner normalization defect {0:.3e}")]
    GridCoverage(f64),

    #[error("invalid phase-space grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, KerrError>;
