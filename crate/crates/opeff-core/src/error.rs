//! Error type shared by every module of the crate.

use alloc::string::String;
use core::fmt;

/// Failure conditions raised by signal algebra, model construction,
/// index evaluation, and the plant simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    Argument(String),
    /// Two signals that must share a time grid do not.
    GridMismatch(String),
    /// A channel has no cost rate configured for it.
    MissingCostRate {
        /// Product identifier of the uncovered channel.
        product_id: String,
    },
    /// A model-level invariant does not hold (e.g. an operation that has not
    /// physically completed by its declared finish time).
    Model(String),
    /// An index is undefined for the given operation (e.g. `RE = 0`).
    UndefinedIndex(String),
    /// The plant simulation cannot produce a valid operation.
    Simulation(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Argument(msg) => write!(f, "invalid argument: {msg}"),
            Error::GridMismatch(msg) => write!(f, "time grid mismatch: {msg}"),
            Error::MissingCostRate { product_id } => {
                write!(f, "no cost rate configured for product `{product_id}`")
            }
            Error::Model(msg) => write!(f, "model error: {msg}"),
            Error::UndefinedIndex(msg) => write!(f, "undefined index: {msg}"),
            Error::Simulation(msg) => write!(f, "simulation error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
