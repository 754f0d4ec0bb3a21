use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("value {value} saturated to the boundary of (0, 1)")]
    Saturated { value: f64 },
    #[error("derivative is singular at ({x}, {y})")]
    Singularity { x: f64, y: f64 },
    #[error("threshold M = {0} is not supported, region operations require M > 1")]
    UnsupportedThreshold(f64),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("no witness found below p_ik = {limit} for M = {m}")]
    WitnessNotFound { m: f64, limit: f64 },
    #[error("K = {k} exceeds the enumeration limit of {limit}")]
    SizeGuard { k: usize, limit: usize },
    #[error("comparison graph is disconnected: components {components:?}")]
    Disconnected { components: Vec<Vec<usize>> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
