use num_complex::Complex64 as C64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("theta series did not converge within {max_terms} terms")]
    TruncationFailure { max_terms: usize },

    #[error("invalid modulus: Im(tau) = {im_tau} is below the supported floor {floor}")]
    InvalidModulus { im_tau: f64, floor: f64 },

    #[error("singular argument {value} in {context}")]
    SingularArgument { context: &'static str, value: C64 },

    #[error("derivative order {0} is not supported")]
    UnsupportedOrder(u32),

    #[error("{what} is not available in the {case} case")]
    UnsupportedCase { what: &'static str, case: &'static str },

    #[error("leg {leg} is out of range for a {n_legs}-leg operator")]
    LegOutOfRange { leg: usize, n_legs: usize },

    #[error("leg {0} is listed more than once")]
    DuplicateLeg(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("residue extrapolation is unstable: radii estimates differ by {difference:e}")]
    ExtrapolationUnstable { difference: f64 },

    #[error("sampling exhausted for {check}: {rejects} candidate points rejected")]
    SamplingExhausted { check: String, rejects: usize },

    #[error("unknown check id: {0}")]
    UnknownCheck(String),

    #[error("invalid sample plan: {0}")]
    InvalidPlan(String),

    #[error("invalid dynamical vector: {0}")]
    InvalidDynVector(String),
}

impl Error {
    pub fn singular(context: &'static str, value: C64) -> Self {
        Error::SingularArgument { context, value }
    }
}
