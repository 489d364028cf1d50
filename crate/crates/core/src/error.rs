use thiserror::Error;

/// Errors produced by the qmatch library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed input data (non-finite values, length mismatches, ordering).
    #[error("invalid input: {0}")]
    Input(String),
    /// Distribution parameters violating the family's constraints.
    #[error("invalid parameters for {family}: {reason}")]
    Parameter {
        family: &'static str,
        reason: String,
    },
    /// Every warmup proposal of a chain was rejected.
    #[error("sampler initialisation failed for chain {chain}: acceptance {acceptance:.2e} during warmup, started at eta = {eta:?}")]
    Initialization {
        chain: usize,
        eta: Vec<f64>,
        acceptance: f64,
    },
    /// The objective was non-finite at every optimizer start.
    #[error("optimisation failed: {0}")]
    Optimization(String),
    /// Reports being compared were fitted to different observations.
    #[error("reports were fitted to different observations")]
    ObservationMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
