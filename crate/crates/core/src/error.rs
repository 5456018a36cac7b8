use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mode index {mode} for a tensor of order {order}")]
    InvalidMode { mode: usize, order: usize },

    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("rank {rank} out of range (max {max})")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("rank deficiency in {what} (smallest/largest singular value ratio {ratio:.3e})")]
    RankDeficient { what: &'static str, ratio: f64 },

    #[error("singular {what} (condition number {cond:.3e})")]
    Singular { what: &'static str, cond: f64 },

    #[error("singular Fisher information (condition number {cond:.3e}); null direction {null_direction:?}")]
    SingularFim { cond: f64, null_direction: Vec<(String, f64)> },

    #[error("spatial smoothing requires K4 + L4 = M + 1 (K4={k4}, L4={l4}, M={m})")]
    Smoothing { k4: usize, l4: usize, m: usize },

    #[error("ADMM diverged at iteration {iteration}: objective is not finite")]
    Diverged { iteration: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("failed to parse configuration: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error("{0}")]
    Bessel(String),

    #[error("empty search grid: {0}")]
    EmptyGrid(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
