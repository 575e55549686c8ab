use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown point id {0}")]
    UnknownPoint(u32),

    #[error("empty subset")]
    EmptySubset,

    #[error("nonpositive edge length {len} on edge ({u},{v})")]
    NonpositiveEdgeLength { u: u32, v: u32, len: f64 },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("injection search cap exceeded: ball has {0} points (cap {1})")]
    InjectionSearchTooLarge(usize, usize),

    #[error("invalid covering rule: {0}")]
    InvalidRule(String),

    #[error("observed weight {got} exceeds bias cap {cap}")]
    BiasCapExceeded { got: f64, cap: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn window(msg: impl Into<String>) -> Self {
        Error::WindowTooSmall(msg.into())
    }
}
