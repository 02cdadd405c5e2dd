use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuinError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("regime {state} is a subordinator; the right-inverse exponent is undefined")]
    SubordinatorRegime { state: usize },

    #[error("regime is not a subordinator")]
    NotSubordinator,

    #[error("no root of the Laplace exponent at level {lam}")]
    NoRoot { lam: f64 },

    #[error("operation requires drift-only regimes with positive premium rate: {0}")]
    RegimeMismatch(String),

    #[error("a positive killing rate is required")]
    KillingRequired,

    #[error("claim laws must be identical across clients")]
    NonIdenticalClaims,

    #[error("derivative of order {order} of the claim transform is undefined at alpha = {alpha}")]
    MomentUndefined { order: usize, alpha: f64 },

    #[error("linear system is singular")]
    SingularSystem,

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("chain enumeration for m = {m} exceeds the budget of {max}")]
    ChainBudgetExceeded { m: usize, max: usize },

    #[error("transform evaluation failed: {0}")]
    EvaluationFailed(String),

    #[error("unsupported regime for simulation: {0}")]
    UnsupportedRegime(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, RuinError>;
