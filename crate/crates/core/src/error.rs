use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a network needs at least an input and an output size, got {0} sizes")]
    TooFewLayers(usize),

    #[error("layer sizes must be positive")]
    ZeroLayerSize,

    #[error("replay memory holds {have} transitions but a minibatch of {need} was requested")]
    InsufficientTransitions { have: usize, need: usize },

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("thresholds must be pairwise distinct (states {0} and {1} coincide)")]
    NonDistinctThresholds(usize, usize),

    #[error("activation difference does not change sign on [-{bound}, {bound}] for state {state}")]
    NoCrossing { state: usize, bound: f64 },

    #[error("linear system is singular")]
    Singular,

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
