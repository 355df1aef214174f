//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A source has no population in the modes a quantity is defined over.
    #[error("degenerate source: {0}")]
    DegenerateSource(&'static str),

    /// An input parameter is outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Path enumeration would exceed the configured cap.
    #[error("path enumeration limit exceeded: {count} paths, cap {cap}")]
    EnumerationLimit { count: usize, cap: usize },

    /// Two records that must share a scan axis do not.
    #[error("scan axes do not match")]
    AxisMismatch,

    /// An operation requiring a uniform axis received a non-uniform one.
    #[error("scan axis is not uniform; resample before transforming")]
    NonUniformAxis,

    /// A record of the wrong kind was supplied.
    #[error("fringe record kind mismatch: expected {expected}, got {got}")]
    KindMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// Both sources are dark; visibility is undefined.
    #[error("visibility undefined: total source rate is zero")]
    UndefinedVisibility,

    /// No reconstructed peak power; SNR is undefined.
    #[error("SNR undefined: no peak power at the target depth")]
    UndefinedSnr,

    /// Edge-response fitting found no transition.
    #[error("no edge transition found in profile")]
    NoEdgeTransition,

    /// A requested depth lies outside the reconstruction range.
    #[error("depth {depth} m outside the reconstruction range [0, {max}] m")]
    DepthOutOfRange { depth: f64, max: f64 },
}
