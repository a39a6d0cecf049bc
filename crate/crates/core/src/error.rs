use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {}", .0.join("; "))]
    InvalidNetwork(Vec<String>),

    #[error("state has length {got}, network has {expected} neurons")]
    StateLength { expected: usize, got: usize },

    /// Every activation must be complex-differentiable at
    /// the equilibrium component.
    #[error("activation of neuron {component} is not complex-differentiable at the equilibrium")]
    NotComplexDifferentiable { component: usize },

    #[error("non-uniform peripheral diagonal: {0}")]
    NonUniformPeripheral(String),

    #[error("non-uniform ring coefficients: {0}")]
    NonUniformRing(String),

    #[error("topology mismatch: expected {expected}, network is {found}")]
    TopologyMismatch { expected: String, found: String },

    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("eigenvalue iteration did not converge after {iterations} iterations ({} eigenvalues found)", .partial.len())]
    EigenNoConvergence {
        iterations: usize,
        partial: Vec<Complex64>,
    },

    #[error("Mittag-Leffler series outside trusted window: {0}")]
    OracleWindow(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
