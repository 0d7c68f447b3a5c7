use super::{FIT_REGULARIZATION, INTERTWINER_TOL};
use crate::error::{Error, Result};
use crate::families::{ProjectionFamily, PROJ_TOL};
use crate::matcore::{
    frobenius, hermitian_defect, hermitian_eig, hermitian_function, identity, isometry_defect, kron,
    null_space, polar_isometry, real, seminorm, ComplexMatrix, DensityView,
};

/// Relative singular-value cutoff when solving the intertwiner system.
const NULL_TOL: f64 = 1e-8;

/// Polar factors whose smallest singular value falls below this (relative
/// to the largest) are rejected.
const POLAR_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct IntertwinerResult {
    /// Unitary `U: C^r → C^d ⊗ C^s` with `U P_v U* = P̃_v ⊗ I_s`.
    pub u: ComplexMatrix,
    pub s: usize,
    /// `max_v ‖U P_v U* − P̃_v ⊗ I_s‖_F`
    pub residual: f64,
    /// `max_{i,j} ‖T_i*T_j − δ_ij I_d / d‖_F` over the unit-norm solution basis.
    pub schur_residual: f64,
}

fn check_candidate(fam: &ProjectionFamily, candidate: &[ComplexMatrix]) -> Result<usize> {
    fam.check_shape()?;
    if candidate.len() != fam.n {
        return Err(Error::InvalidFamily(format!(
            "candidate has {} projections, family has {}",
            candidate.len(),
            fam.n
        )));
    }
    let r = candidate[0].nrows();
    if !r.is_multiple_of(fam.d) {
        return Err(Error::NotARepresentation(format!(
            "dimension {r} is not a multiple of {}",
            fam.d
        )));
    }
    let mut total = ComplexMatrix::zeros(r, r);
    for (v, p) in candidate.iter().enumerate() {
        if p.shape() != (r, r) {
            return Err(Error::InvalidFamily(format!("candidate projection {v} is not {r}x{r}")));
        }
        if hermitian_defect(p) > PROJ_TOL || frobenius(&(p * p - p)) > PROJ_TOL * r as f64 {
            return Err(Error::InvalidFamily(format!("candidate element {v} is not a projection")));
        }
        total += p;
    }
    if frobenius(&(total - identity(r) * real(fam.x.to_f64()))) > PROJ_TOL * r as f64 {
        return Err(Error::InvalidFamily(format!("candidate does not sum to {}·I", fam.x)));
    }
    Ok(r)
}

/// Unitary equivalence between a candidate representation `{P_v}` on `C^r`
/// and `{P̃_v ⊗ I_s}`, from the solutions of `T P̃_v = P_v T`.
pub fn find_intertwiner(fam: &ProjectionFamily, candidate: &[ComplexMatrix]) -> Result<IntertwinerResult> {
    let r = check_candidate(fam, candidate)?;
    let d = fam.d;
    let s = r / d;

    // vec(P T − T P̃) = (P ⊗ I_d − I_r ⊗ P̃ᵀ) vec(T), row-major vec of T: r×d.
    let mut system = ComplexMatrix::zeros(fam.n * r * d, r * d);
    for (v, (p, pt)) in candidate.iter().zip(&fam.projections).enumerate() {
        let block = kron(p, &identity(d)) - kron(&identity(r), &pt.transpose());
        system.view_mut((v * r * d, 0), (r * d, r * d)).copy_from(&block);
    }
    let basis = null_space(&system, NULL_TOL);
    if basis.ncols() != s {
        return Err(Error::NotARepresentation(format!(
            "intertwiner space has dimension {}, expected {s}",
            basis.ncols()
        )));
    }
    let blocks: Vec<ComplexMatrix> = (0..s)
        .map(|i| ComplexMatrix::from_fn(r, d, |row, col| basis[(row * d + col, i)]))
        .collect();

    let tr_scale = real(1.0 / d as f64);
    let mut schur_residual: f64 = 0.0;
    for i in 0..s {
        for j in 0..s {
            let target = if i == j { identity(d) * tr_scale } else { ComplexMatrix::zeros(d, d) };
            schur_residual = schur_residual.max(frobenius(&(blocks[i].adjoint() * &blocks[j] - target)));
        }
    }

    // Row a·s + i of U is √d · (column a of T_i)*.
    let scale = (d as f64).sqrt();
    let u = ComplexMatrix::from_fn(d * s, r, |row, col| blocks[row % s][(col, row / s)].conj() * scale);

    let residual = conjugation_residual(&u, candidate, &fam.projections, s);
    if residual > INTERTWINER_TOL || isometry_defect(&u) > INTERTWINER_TOL {
        return Err(Error::IntertwinerFailed(format!(
            "conjugation residual {residual:.3e}, Schur residual {schur_residual:.3e}"
        )));
    }
    Ok(IntertwinerResult { u, s, residual, schur_residual })
}

fn conjugation_residual(u: &ComplexMatrix, ops: &[ComplexMatrix], targets: &[ComplexMatrix], s: usize) -> f64 {
    ops.iter()
        .zip(targets)
        .map(|(p, t)| frobenius(&(u * p * u.adjoint() - kron(t, &identity(s)))))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct FitResult {
    /// Isometry `V: C^r → C^d ⊗ C^s`.
    pub v: ComplexMatrix,
    pub s: usize,
    /// `‖E_v − V*(P̃_v ⊗ I_s)V‖_ρ` per question.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Smallest singular value of the pre-projection fit, relative to the largest.
    pub conditioning: f64,
}

/// Isometry `V` making `V*(P̃_v ⊗ I_s)V` as close as possible to `E_v`.
///
/// The fit minimises `Σ_v ‖(P̃_v Z − Z E_v)R‖_F²` over `Z: C^r → C^d` with
/// `‖Z R‖_F = 1`, where `R = (ρ + μI/r)^{1/2}`. The `s` lowest solutions
/// `Z_1..Z_s` are stacked into `Σ_i Z_i ⊗ e_i` and projected onto the
/// nearest isometry. For an exact representation the minimisers are the
/// intertwiners themselves.
pub fn fit_isometry(e: &[ComplexMatrix], fam: &ProjectionFamily, rho: &DensityView) -> Result<FitResult> {
    fam.check_shape()?;
    fit_against(e, &fam.projections, fam.d, rho)
}

pub(crate) fn fit_against(
    e: &[ComplexMatrix],
    targets: &[ComplexMatrix],
    d: usize,
    rho: &DensityView,
) -> Result<FitResult> {
    if e.len() != targets.len() || e.is_empty() {
        return Err(Error::InvalidShape(format!(
            "{} operators to fit against {} projections",
            e.len(),
            targets.len()
        )));
    }
    let r = rho.dim();
    if e.iter().any(|m| m.shape() != (r, r)) {
        return Err(Error::InvalidShape(format!("operators must be {r}x{r} to match the state")));
    }
    let s = r.div_ceil(d).max(1);

    // With Y = Z R the problem becomes an ordinary eigenproblem for
    // Σ_v ‖P̃_v Y − Y Ẽ_v‖², Ẽ_v = R⁻¹ E_v R.
    let weighted = rho.matrix() + identity(r) * real(FIT_REGULARIZATION / r as f64);
    let root = hermitian_function(&weighted, |l| real(l.max(0.0).sqrt()))?;
    let root_inv = hermitian_function(&weighted, |l| real(1.0 / l.sqrt()))?;
    let mut gram = ComplexMatrix::zeros(d * r, d * r);
    for (ev, pv) in e.iter().zip(targets) {
        let tilde = &root_inv * ev * &root;
        let m = kron(pv, &identity(r)) - kron(&identity(d), &tilde.transpose());
        gram += m.adjoint() * m;
    }
    let gram = (&gram + gram.adjoint()) * real(0.5);
    let (_, vectors) = hermitian_eig(&gram)?;
    let total = d * r;
    let mut stacked = ComplexMatrix::zeros(d * s, r);
    for i in 0..s {
        let col = vectors.column(total - 1 - i);
        let y = ComplexMatrix::from_fn(d, r, |a, c| col[a * r + c]);
        let z = y * &root_inv;
        for a in 0..d {
            for c in 0..r {
                stacked[(a * s + i, c)] = z[(a, c)];
            }
        }
    }
    let (v, smallest) = polar_isometry(&stacked);
    let largest = crate::matcore::operator_norm(&stacked);
    let conditioning = if largest > 0.0 { smallest / largest } else { 0.0 };
    if conditioning < POLAR_TOL {
        return Err(Error::FitDegenerate(format!(
            "fitted map is rank-deficient (relative smallest singular value {conditioning:.3e})"
        )));
    }
    let residuals = compression_residuals(&v, e, targets, s, rho)?;
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(FitResult { v, s, residuals, max_residual, conditioning })
}

/// `‖E_v − V*(P̃_v ⊗ I_s)V‖_ρ` for each `v`.
pub(crate) fn compression_residuals(
    v: &ComplexMatrix,
    e: &[ComplexMatrix],
    targets: &[ComplexMatrix],
    s: usize,
    rho: &DensityView,
) -> Result<Vec<f64>> {
    e.iter()
        .zip(targets)
        .map(|(ev, pv)| seminorm(&(ev - v.adjoint() * kron(pv, &identity(s)) * v), rho))
        .collect()
}
