use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// `Config` and `Usage` map to exit code 2 in the CLI, everything else to 1.
#[derive(Error, Debug)]
pub enum Error {
    /// Tensor/network dimension mismatch. Carries the offending shapes.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Non-finite value (NaN/Inf) rejected at an op boundary.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A caller violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid game definition or unsupported solver request.
    #[error("game error: {0}")]
    Game(String),

    /// Environment rejected a step or action.
    #[error("env error: {0}")]
    Env(String),

    /// Training aborted (divergence guard, NaN gradient, ...).
    #[error("training error: {0}")]
    Train(String),

    /// Bad configuration file, preset, or override key.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed input file (game file, checkpoint, metrics).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code the CLI should use for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) => 2,
            _ => 1,
        }
    }
}
