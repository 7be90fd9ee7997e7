use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate mode: {0}")]
    DegenerateMode(String),

    #[error("kernel is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("kernel has a significant negative eigenvalue {value:.3e} (largest {largest:.3e})")]
    NegativeEigenvalue { value: f64, largest: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid too short: cavity field has not decayed by the end of the grid (|Phi| = {remaining:.3e}); extend t_end to at least {suggested_t_end:.3}")]
    GridTooShort { remaining: f64, suggested_t_end: f64 },

    #[error("non-convergent transformation: {0}")]
    NonConvergent(String),

    #[error("output mode has zero pullback norm (zeta = 0); the kernels violate the commutator")]
    ZeroZeta,

    #[error("theory violation: {0}")]
    TheoryViolation(String),

    #[error("no seeded modes")]
    NoSeededModes,

    #[error("Fock truncation too small: {0}")]
    Truncation(String),

    #[error("phase-space grid too small: {0}")]
    GridExtent(String),

    #[error("reconstructed density matrix has negative eigenvalue {0:.3e}; refine the phase-space grid")]
    Negativity(f64),

    #[error("fidelity target is not pure (purity {0:.6})")]
    MixedTarget(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
