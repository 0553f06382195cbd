use alloc::string::String;

/// Errors raised by the evaluators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point {point} does not belong to carrier {carrier}")]
    Domain { point: String, carrier: String },

    #[error("coordinates must be finite and non-empty")]
    NonFiniteCoordinate,

    #[error("distance function returned a non-finite value at ({0})")]
    NonFiniteValue(String),

    #[error("map `{map}` produced a value outside the carrier: {detail}")]
    MapOutput { map: String, detail: String },

    #[error("exhaustive mode needs a finite carrier")]
    ExhaustiveOnInfinite,

    #[error("sample must be non-empty")]
    EmptySample,

    #[error("parameter `{name}` out of range: {detail}")]
    Parameter { name: &'static str, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration of {size}^{size} maps exceeds the cap of size {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("invalid finite metric: {0}")]
    InvalidMetric(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        detail: detail.into(),
    }
}
