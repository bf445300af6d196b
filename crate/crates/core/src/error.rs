use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operands disagree on dimension, order, chart or basepoint.
    #[error("structural mismatch: {0}")]
    Structural(String),
    #[error("cannot compose: target {target} does not match source {source_pt}")]
    Composition { target: String, source_pt: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("normalization error: {0}")]
    Normalization(String),
    #[error("map leaves the coefficient ring: {0}")]
    UnsupportedMap(String),
    #[error("tolerance not met: {what} (achieved {achieved:.3e}, wanted {wanted:.3e})")]
    Tolerance { what: String, achieved: f64, wanted: f64 },
    #[error("positivity lost at {at}: {detail}")]
    Positivity { at: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}
