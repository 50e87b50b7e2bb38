use thiserror::Error;

/// Errors raised by the numerical pipelines.
///
/// Verdicts such as "assumption violated" or "Lyapunov bound broken" are not
/// errors; they are returned as data. These variants are reserved for inputs
/// that cannot be processed and for solver breakdowns.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input domain: {0}")]
    InputDomain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("root not bracketed for |u| <= {limit:e} at x = {x:?}")]
    RootNotBracketed { x: Vec<f64>, limit: f64 },

    #[error("hj iteration did not converge after {iterations} sweeps (last update {last_update:e})")]
    NonConvergence { iterations: usize, last_update: f64 },

    #[error("sampling failure: acceptance rate {rate:e} after {attempts} draws")]
    SamplingFailure { rate: f64, attempts: usize },

    #[error("internal contradiction: {0}")]
    InternalContradiction(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
