use crate::error::{Error, Result};
use crate::families::ProjectionFamily;
use crate::matcore::{
    hermitian_eig, inner, kron, maximally_entangled, vector_norm, BipartiteVector, ComplexMatrix, ComplexVector,
};

/// Eigenvalues closer than this (relative to the matrix scale) are merged.
const DEGENERACY_TOL: f64 = 1e-9;

/// `Ñ = Σ_v P̃_v ⊗ P̃_vᵀ` and its top eigenpair.
#[derive(Clone, Debug)]
pub struct NOperator {
    pub matrix: ComplexMatrix,
    /// Eigenvalues, descending.
    pub spectrum: Vec<f64>,
    pub lambda_max: f64,
    pub lambda_2: f64,
    /// `x − λ₂`
    pub gap: f64,
    /// Unit top eigenvector, phase-aligned so `⟨φ_d, t⟩ ≥ 0`.
    pub top_vector: BipartiteVector,
    /// `|⟨φ_d, t⟩|`
    pub overlap: f64,
}

fn merge_tol(a: &ComplexMatrix) -> f64 {
    DEGENERACY_TOL * a.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

pub fn n_operator(fam: &ProjectionFamily) -> Result<NOperator> {
    fam.check_shape()?;
    let d = fam.d;
    let mut matrix = ComplexMatrix::zeros(d * d, d * d);
    for p in &fam.projections {
        matrix += kron(p, &p.transpose());
    }
    let (spectrum, vectors) = hermitian_eig(&matrix)?;
    let lambda_max = spectrum[0];
    let tol = merge_tol(&matrix);
    let lambda_2 = spectrum.get(1).copied().unwrap_or(f64::NEG_INFINITY);
    if lambda_max - lambda_2 <= tol {
        return Err(Error::SpectralDegeneracy(format!(
            "top eigenvalue {lambda_max} of N is not simple (next {lambda_2})"
        )));
    }
    let phi = maximally_entangled(d)?;
    let mut top: ComplexVector = vectors.column(0).into_owned();
    let ov = inner(&phi.amplitudes, &top);
    if ov.norm() > 0.0 {
        // inner(φ, t) = t*φ; rotating t by its phase makes t*φ real positive.
        let phase = ov / ov.norm();
        top *= phase;
    }
    let overlap = ov.norm();
    Ok(NOperator {
        matrix,
        gap: fam.x.to_f64() - lambda_2,
        lambda_max,
        lambda_2,
        spectrum,
        top_vector: BipartiteVector::new(d, d, top)?,
        overlap,
    })
}

/// Both sides of `‖Q₁ξ‖² ≥ 1 − (λ₁ − ⟨Aξ,ξ⟩)/(λ₁ − λ₂)` for Hermitian `A`.
pub fn eigvec_overlap_bound(a: &ComplexMatrix, xi: &ComplexVector) -> Result<(f64, f64)> {
    if a.nrows() != xi.len() {
        return Err(Error::InvalidShape(format!("{}x{} matrix and vector of length {}", a.nrows(), a.ncols(), xi.len())));
    }
    let (values, vectors) = hermitian_eig(a)?;
    let tol = merge_tol(a);
    let lambda_1 = values[0];
    let top = values.iter().take_while(|&&l| lambda_1 - l <= tol).count();
    let Some(&lambda_2) = values.get(top) else {
        return Err(Error::SpectralDegeneracy("matrix has a single distinct eigenvalue".into()));
    };
    let lhs: f64 = (0..top).map(|k| inner(xi, &vectors.column(k).into_owned()).norm_sqr()).sum();
    let norm = vector_norm(xi);
    let expectation = inner(&(a * xi), xi).re / (norm * norm);
    let rhs = 1.0 - (lambda_1 - expectation) / (lambda_1 - lambda_2);
    Ok((lhs / (norm * norm), rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{four_family, simplex_family};
    use crate::matcore::random::{random_matrix, random_unit_vector, seeded};
    use crate::matcore::real;

    #[test]
    fn triangle_spectrum() {
        let n = n_operator(&simplex_family(3).unwrap()).unwrap();
        let want = [1.5, 0.75, 0.75, 0.0];
        for (got, want) in n.spectrum.iter().zip(want) {
            assert!((got - want).abs() < 1e-10);
        }
        assert!((n.gap - 0.75).abs() < 1e-10);
        assert!(n.overlap > 1.0 - 1e-12);
    }

    #[test]
    fn four_family_top_eigenvalue() {
        let n1 = n_operator(&four_family(1).unwrap()).unwrap();
        assert!((n1.lambda_max - 4.0 / 3.0).abs() < 1e-10);
        assert!(n1.overlap > 1.0 - 1e-9);
        let n2 = n_operator(&four_family(2).unwrap()).unwrap();
        assert!((n2.lambda_max - 1.6).abs() < 1e-9);
        assert!(n2.gap > 0.0);
    }

    #[test]
    fn degenerate_top_is_rejected() {
        let a = crate::matcore::identity(3);
        assert!(matches!(
            eigvec_overlap_bound(&a, &random_unit_vector(3, &mut seeded(1))),
            Err(Error::SpectralDegeneracy(_))
        ));
    }

    #[test]
    fn overlap_bound_extremes() {
        let d = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![real(3.0), real(2.0), real(1.0)]));
        let e = |k: usize| ComplexVector::from_fn(3, |i, _| real(if i == k { 1.0 } else { 0.0 }));
        let (lhs, rhs) = eigvec_overlap_bound(&d, &e(0)).unwrap();
        assert!((lhs - 1.0).abs() < 1e-14 && (rhs - 1.0).abs() < 1e-14);
        let (lhs, rhs) = eigvec_overlap_bound(&d, &e(1)).unwrap();
        assert!(lhs.abs() < 1e-14 && rhs <= 1e-14);
    }

    #[test]
    fn overlap_bound_random() {
        let mut rng = seeded(11);
        for dim in 2..8 {
            let g = random_matrix(dim, dim, &mut rng);
            let a = &g * g.adjoint();
            let xi = random_unit_vector(dim, &mut rng);
            let (lhs, rhs) = eigvec_overlap_bound(&a, &xi).unwrap();
            assert!(lhs >= rhs - 1e-10);
        }
    }
}
