//! Exact arithmetic for positive definite integral quadratic forms.
//!
//! The crate computes representation numbers via theta series, Siegel local
//! densities and genus masses, imaginary-quadratic class numbers, orders of
//! higher even K-groups of real quadratic fields, Hecke eigenvalue data for
//! the half-integral-weight forms attached to a genus, and exact 2-adic
//! valuation bounds for representation numbers — all over arbitrary-precision
//! integers and rationals.

pub mod bounds;
pub mod curves;
pub mod error;
pub mod fixtures;
pub mod localdensity;
pub mod modforms;
pub mod numtheory;
pub mod qform;
pub mod siegel;
pub mod tables;

pub use error::{Error, Result};
pub use numtheory::ExactRational;
