//! Exact multivariate polynomial arithmetic over Q(i), arbitrary-precision
//! complex evaluation, and single-variable elimination by resultants.
//!
//! All values are immutable after construction and safe to share across
//! threads.

pub mod gaussian;
pub mod gcd;
pub mod mpc;
pub mod poly;
pub mod resultant;

pub use gaussian::GaussianRational;
pub use mpc::{MPComplex, Real};
pub use poly::{poly_from_text, poly_to_text, MultiPoly, VarSet};
pub use resultant::resultant;
