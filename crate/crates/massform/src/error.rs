//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by the library.
///
/// Everything that can go wrong at runtime funnels through this enum so the
/// CLI can map failures to exit codes uniformly.
#[derive(Debug, Error)]
pub enum Error {
    /// The caller handed us something malformed (a non-symmetric Gram
    /// matrix, a negative discriminant where a positive one is required,
    /// and so on).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The request is well-formed but outside what the implementation
    /// supports (e.g. an operation that requires a diagonal form applied to
    /// a genus with no diagonal class).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical routine could not reach the accuracy it needs.
    #[error("insufficient precision: needed {need} but achieved {have}")]
    Precision { need: f64, have: f64 },

    /// A search or enumeration exceeded its configured budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A quantity that must be nonzero (a mass, an L-value used as a
    /// denominator) vanished.
    #[error("mass or L-value vanishes; ratio undefined")]
    MassVanishes,

    /// An exact integrality check failed: a quantity proved rational where
    /// an integer was required.
    #[error("integrality failure: {0}")]
    IntegralityFailure(String),

    /// A genus descriptor file is structurally valid JSON but semantically
    /// broken (weights don't sum to one, Gram matrix not positive definite,
    /// ...).
    #[error("bad genus descriptor: {0}")]
    Descriptor(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
