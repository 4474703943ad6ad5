use thiserror::Error;

use crate::scenario_io::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("states live in different bases")]
    BasisMismatch,

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("cannot normalize the zero vector")]
    ZeroVector,

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("observable is not a projector (eigenvalue {0} is neither 0 nor 1)")]
    NotProjector(f64),

    #[error("final states {0} and {1} are not orthogonal")]
    NonOrthogonalFinals(String, String),

    #[error("final state set is not complete: {0}")]
    IncompleteFinals(String),

    #[error("post-selection impossible under this measurement")]
    PostSelectionImpossible,

    #[error("weak value undefined (orthogonal post-selection)")]
    WeakValueUndefined,

    #[error("meter statistics undefined")]
    MeterStatisticsUndefined,

    #[error("meter width must be positive and finite, got {0}")]
    InvalidWidth(f64),

    #[error("widths must be positive and strictly increasing")]
    InvalidWidthSequence,

    #[error("invalid reading grid: {0}")]
    InvalidGrid(String),

    #[error("identity check failed: {what} (deviation {deviation:e})")]
    IdentityViolated { what: String, deviation: f64 },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    pub(crate) fn unknown<'a>(
        kind: &'static str,
        name: &str,
        available: impl IntoIterator<Item = &'a String>,
    ) -> Self {
        let available: Vec<&str> = available.into_iter().map(String::as_str).collect();
        Error::UnknownName {
            kind,
            name: name.to_string(),
            available: available.join(", "),
        }
    }
}
