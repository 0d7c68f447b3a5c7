//! Approximate-representation residuals, intertwiners, isometry fitting and
//! local dilation certificates for strategies near the canonical one.
//!
//! The pipeline for a two-outcome strategy `S` close to the canonical
//! strategy of a family `{P̃_v}`:
//!
//! 1. [`approx_rep_residuals`] measures how far `S` is from an exact
//!    representation (synchronicity, idempotency, sum rule, traciality).
//! 2. [`fit_isometry`] finds `V_A`, `V_B` compressing `P̃_v ⊗ I` (resp.
//!    `P̃_vᵀ ⊗ I`) onto the measured operators.
//! 3. [`extract_dilation`] projects `(V_A ⊗ V_B)ψ` onto the top eigenspace of
//!    `Ñ = Σ P̃_v ⊗ P̃_vᵀ`, reads off the junk state and measures every
//!    dilation residual.

pub mod bounds;
pub mod dilation;
pub mod intertwiner;
pub mod residuals;
pub mod spectral;

pub use bounds::{expectation_estimate, near_vectors_bound, vector_estimate, BoundCheck};
pub use dilation::{
    compose_dilations, dilation_epsilon, extract_dilation, reduction_certificate, CertificateResiduals,
    DilationCertificate,
};
pub use intertwiner::{find_intertwiner, fit_isometry, FitResult, IntertwinerResult};
pub use residuals::{
    approx_rep_residuals, residual_report, sync_residuals, tracial_audit, tracial_residual, RepResiduals,
    ResidualReport, SyncBounds, TracialReport,
};
pub use spectral::{eigvec_overlap_bound, n_operator, NOperator};

/// Slack added to every `value ≤ budget` comparison to absorb roundoff.
pub const PASS_SLACK: f64 = 1e-9;

/// Default monomial degree for the traciality audit.
pub const DEFAULT_MONOMIAL_DEGREE: usize = 2;

/// Largest number of monomial pairs the traciality audit will enumerate.
pub const MAX_MONOMIAL_PAIRS: usize = 1_000_000;

/// Below this overlap with the top eigenspace no junk state is extracted.
pub const ALPHA_MIN: f64 = 0.1;

/// Acceptance threshold for an intertwiner's conjugation residual.
pub const INTERTWINER_TOL: f64 = 1e-8;

/// Tikhonov term `μ·I/r` added to `ρ` before weighting the isometry fit.
pub const FIT_REGULARIZATION: f64 = 1e-6;

pub(crate) fn within(value: f64, budget: f64) -> bool {
    value <= budget + PASS_SLACK
}
