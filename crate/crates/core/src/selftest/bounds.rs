//! Both sides of the auxiliary inequalities used by the robustness argument,
//! evaluated on concrete inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{inner, operator_norm, seminorm, vector_norm, BipartiteVector, ComplexMatrix, ComplexVector};

/// A measured left-hand side against its bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

fn check_local_shapes(psi: &BipartiteVector, xs: [&ComplexMatrix; 2], ys: [&ComplexMatrix; 2]) -> Result<()> {
    let ok = xs.iter().all(|x| x.shape() == (psi.dim_a, psi.dim_a))
        && ys.iter().all(|y| y.shape() == (psi.dim_b, psi.dim_b));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidShape(format!("local operators do not act on a {}x{} state", psi.dim_a, psi.dim_b)))
    }
}

/// `|⟨(X₁⊗Y₁ − X₂⊗Y₂)ψ, ψ⟩| ≤ ‖X₁−X₂‖_{ρ_A}‖Y₂*‖_{ρ_B} + ‖Y₁−Y₂‖_{ρ_B}‖X₁*‖_{ρ_A}`.
pub fn expectation_estimate(
    x1: &ComplexMatrix,
    x2: &ComplexMatrix,
    y1: &ComplexMatrix,
    y2: &ComplexMatrix,
    psi: &BipartiteVector,
) -> Result<BoundCheck> {
    check_local_shapes(psi, [x1, x2], [y1, y2])?;
    let diff = &psi.apply_local(x1, y1)?.amplitudes - &psi.apply_local(x2, y2)?.amplitudes;
    let lhs = inner(&diff, &psi.amplitudes).norm();
    let (ra, rb) = (psi.reduced_a(), psi.reduced_b());
    let rhs = seminorm(&(x1 - x2), &ra)? * seminorm(&y2.adjoint(), &rb)?
        + seminorm(&(y1 - y2), &rb)? * seminorm(&x1.adjoint(), &ra)?;
    Ok(BoundCheck { lhs, rhs })
}

/// `‖(X₁⊗Y₁ − X₂⊗Y₂)ψ‖ ≤ ‖X₁−X₂‖_{ρ_A}‖Y₂‖ + ‖Y₁−Y₂‖_{ρ_B}‖X₁‖`.
pub fn vector_estimate(
    x1: &ComplexMatrix,
    x2: &ComplexMatrix,
    y1: &ComplexMatrix,
    y2: &ComplexMatrix,
    psi: &BipartiteVector,
) -> Result<BoundCheck> {
    check_local_shapes(psi, [x1, x2], [y1, y2])?;
    let diff = &psi.apply_local(x1, y1)?.amplitudes - &psi.apply_local(x2, y2)?.amplitudes;
    let lhs = vector_norm(&diff);
    let rhs = seminorm(&(x1 - x2), &psi.reduced_a())? * operator_norm(y2)
        + seminorm(&(y1 - y2), &psi.reduced_b())? * operator_norm(x1);
    Ok(BoundCheck { lhs, rhs })
}

/// `‖ξ − η‖ ≤ ε₂ + √(ε₁ + (‖ξ‖+‖η‖)ε₂)` with `ε₁ = |‖ξ‖² − ‖η‖²|` and
/// `ε₂ = ‖ξ − Pη‖` for a projection `P`.
pub fn near_vectors_bound(xi: &ComplexVector, eta: &ComplexVector, p: &ComplexMatrix) -> Result<BoundCheck> {
    if xi.len() != eta.len() || p.shape() != (xi.len(), xi.len()) {
        return Err(Error::InvalidShape("vectors and projection must share a dimension".into()));
    }
    let (nx, ne) = (vector_norm(xi), vector_norm(eta));
    let eps1 = (nx * nx - ne * ne).abs();
    let eps2 = vector_norm(&(xi - p * eta));
    Ok(BoundCheck { lhs: vector_norm(&(xi - eta)), rhs: eps2 + (eps1 + (nx + ne) * eps2).sqrt() })
}
