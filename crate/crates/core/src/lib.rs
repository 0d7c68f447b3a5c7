//! Projections summing to a scalar multiple of the identity, their canonical
//! quantum strategies, and numerical self-testing certificates.
//!
//! - [`matcore`]: dense complex linear algebra and bipartite states.
//! - [`families`]: the scalar sets Λ_n and projection-family constructions.
//! - [`strategies`]: strategies, correlations, canonical strategies, noise.
//! - [`selftest`]: approximate-representation residuals and local dilations.
//! - [`harness`]: seeded robustness sweeps and reports.

pub mod error;
pub mod families;
pub mod harness;
pub mod matcore;
pub mod selftest;
pub mod strategies;

pub use error::{Error, Result};
