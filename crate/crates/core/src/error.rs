use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NonUnitaryInput { residual: f64 },

    #[error("quadrature matrix is not orthogonal-symplectic (orthogonality residual {orthogonal:.3e}, symplectic residual {symplectic:.3e})")]
    NonSymplecticInput { orthogonal: f64, symplectic: f64 },

    #[error(
        "feedback loop is ill-posed: I - S22 is singular (smallest singular value {sigma_min:.3e})"
    )]
    IllPosedFeedback { sigma_min: f64 },

    #[error("i*omega*I - A is singular at omega = {omega} rad/s")]
    ResonantFrequency { omega: f64 },

    #[error("network is not a feasible point: {reason}")]
    InfeasiblePoint { reason: String },

    #[error("initial network fails the feasibility guard: {reason}")]
    InfeasibleStart { reason: String },

    #[error("matrix is rank deficient (smallest singular value {sigma_min:.3e})")]
    RankDeficient { sigma_min: f64 },

    #[error("invalid NOPA parameters: {0}")]
    InvalidParams(String),

    #[error("invalid permutation vector: {0}")]
    InvalidPermutation(String),

    #[error("invalid two-level factor: {0}")]
    InvalidFactor(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
