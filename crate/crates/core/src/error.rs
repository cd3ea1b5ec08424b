use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("interval [{lo}, {hi}] is not contained in the domain [{u}, {v}]")]
    OutsideDomain { lo: f64, hi: f64, u: f64, v: f64 },

    #[error("cannot normalize over [{lo}, {hi}]: the interval carries no mass")]
    DegenerateNormalization { lo: f64, hi: f64 },

    #[error("measure is not a probability measure on [0, 1] (domain [{u}, {v}], mass {mass})")]
    NotProbability { u: f64, v: f64, mass: f64 },

    #[error("measure has {count} atom(s), largest jump {largest} at {position}")]
    AtomicMeasure {
        count: usize,
        largest: f64,
        position: f64,
    },

    #[error("coefficient at frequency {freq} not certified: error bound {bound} exceeds 0.5")]
    UncertifiedCoefficient { freq: i64, bound: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("empty index set: {0}")]
    EmptyIndexSet(String),

    #[error("not certified: {0}")]
    Uncertified(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn measure(msg: impl Into<String>) -> Self {
        Error::InvalidMeasure(msg.into())
    }
}
