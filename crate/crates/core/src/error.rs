use thiserror::Error;

/// Error type shared across the simulator modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("potential bound violated: V({point:?}) = {value} outside [0, {bound}]")]
    BoundViolation {
        point: Vec<f64>,
        value: f64,
        bound: f64,
    },

    #[error("invalid scaling: phase {phase} >= 1 (R = {r} too small)")]
    InvalidScaling { phase: f64, r: f64 },

    #[error("trial set empty: cutoff {cutoff} below the discrete ground level {ground}")]
    EmptyTrialSet { cutoff: f64, ground: f64 },

    #[error("no stored outcome is >= {required} (last selected {last}); level missed")]
    Exhausted { last: i64, required: i64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
