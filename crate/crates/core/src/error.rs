use thiserror::Error;

/// Errors produced by the simulator core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("state squared norm {0} exceeds 1")]
    NormTooLarge(f64),

    #[error("amplitude is not finite")]
    NonFinite,

    #[error("target not in dual-rail subspace (residual weight {0:e})")]
    OutsideCodeSpace(f64),

    #[error("mode pair must name two distinct modes")]
    SameMode,

    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("scatter efficiency {0} outside [0, 1]")]
    EtaOutOfRange(f64),

    #[error("invalid gate specification: {0}")]
    InvalidSpec(String),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
