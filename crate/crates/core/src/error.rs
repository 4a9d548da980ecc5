use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("grid specification produces no modes")]
    EmptyGrid,

    #[error("polarization frame undefined at k = 0")]
    ZeroWavevector,

    #[error("Fock basis dimension {dim} exceeds the configured limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeIndex { index: usize, n_modes: usize },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix not positive semidefinite: min eigenvalue {min_eig:.3e} below {threshold:.3e}")]
    NotPositiveSemidefinite { min_eig: f64, threshold: f64 },

    #[error("matrix not positive definite (Cholesky failed)")]
    NotPositiveDefinite,

    #[error("resolvent quadrature stalled at {nodes} nodes with estimate {estimate:.3e} (tol {tol:.3e})")]
    QuadratureStalled { nodes: usize, estimate: f64, tol: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("no level above the ground cluster among {computed} computed eigenvalues")]
    SpectrumExhausted { computed: usize },

    #[error("negative radicand {value:.3e} in upper comparison operator")]
    NegativeRadicand { value: f64 },

    #[error("potential is not even under x -> -x (theta residual {residual:.3e})")]
    OddPotential { residual: f64 },
}
