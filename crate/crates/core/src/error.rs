use thiserror::Error;

/// Failures raised by the solver and the evolution pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid physical constants: {0}")]
    Constants(String),

    #[error("invalid packet: {0}")]
    Packet(String),

    #[error("position {x} lies outside the box [0, {length}]")]
    OutOfDomain { x: f64, length: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error(
        "root scan exhausted k <= {k_max} after finding {found} of {requested} levels; \
         raise the scan range"
    )]
    ScanExhausted {
        found: usize,
        requested: usize,
        k_max: f64,
    },

    #[error("state {index} has vanishing norm integral")]
    DegenerateState { index: usize },

    #[error(
        "basis captures only {captured:.6} of the packet norm; increase the number of levels \
         (or reduce the packet momentum / sharpen the width)"
    )]
    InsufficientBasis { captured: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
