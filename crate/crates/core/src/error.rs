use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("projection cutoff {cutoff} aliases on a grid with m = {m} (need cutoff < m/2)")]
    Aliasing { cutoff: usize, m: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("mass operator is singular: min density {rho_min:e}")]
    SingularMass { rho_min: f64 },

    #[error("density positivity lost: min density {min:e} below floor {floor:e}")]
    PositivityLost { min: f64, floor: f64 },

    #[error("step rejected: {0}")]
    StepRejected(String),

    #[error("numerical blow-up: {0}")]
    NumericalBlowup(String),

    #[error("insufficient sample: need at least {needed}, got {got}")]
    InsufficientSample { needed: usize, got: usize },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
