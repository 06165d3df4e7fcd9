//! Finds points (z, e^z) on algebraic varieties V in C^n x (C*)^n with
//! dominant coordinate projections, and audits them for genericity by
//! detecting integer linear and multiplicative relations, excluding the
//! associated tori, and re-seeding.

pub mod config;
pub mod error;
pub mod generic;
pub mod linalg;
pub mod masser;
pub mod polycore;
pub mod report;
pub mod roots;
pub mod sweep;
pub mod triangularize;
pub mod variety;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use polycore::{GaussianRational, MPComplex, MultiPoly};
