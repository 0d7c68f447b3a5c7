//! Dense complex linear algebra and bipartite-state primitives.
//!
//! Matrices are `nalgebra::DMatrix<Complex<f64>>`. Bipartite vectors are
//! flattened with index `a * dim_b + b`, which is also the row-major
//! flattening used by [`vec_of`], so that `(X ⊗ Y) vec(D) = vec(X D Yᵀ)`.

pub mod json;
pub mod random;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_TOL: f64 = 1e-9;
/// Relative to the largest singular value.
pub const SCHMIDT_RANK_TOL: f64 = 1e-9;
pub const DENSITY_TOL: f64 = 1e-10;

pub const ZERO: C64 = Complex { re: 0.0, im: 0.0 };
pub const ONE: C64 = Complex { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn real(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// Builds a complex matrix from real row-major entries.
pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    assert_eq!(rows * cols, entries.len());
    ComplexMatrix::from_fn(rows, cols, |i, j| real(entries[i * cols + j]))
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vector_norm(v: &ComplexVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨u, v⟩`, linear in the first argument.
pub fn inner(u: &ComplexVector, v: &ComplexVector) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entry of `|M − M*|`.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Kronecker product: `(A⊗B)[(i·rB+k),(j·cB+l)] = A[i,j]·B[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// A vector on `C^{dim_a} ⊗ C^{dim_b}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteVector {
    pub dim_a: usize,
    pub dim_b: usize,
    pub amplitudes: ComplexVector,
}

impl BipartiteVector {
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: ComplexVector) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidDimension(format!("{dim_a}x{dim_b}")));
        }
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::InvalidShape(format!(
                "{} amplitudes for a {}x{} bipartite space",
                amplitudes.len(),
                dim_a,
                dim_b
            )));
        }
        Ok(BipartiteVector { dim_a, dim_b, amplitudes })
    }

    /// Product vector `ξ ⊗ η`.
    pub fn product(xi: &ComplexVector, eta: &ComplexVector) -> Self {
        let amplitudes = ComplexVector::from_fn(xi.len() * eta.len(), |idx, _| {
            xi[idx / eta.len()] * eta[idx % eta.len()]
        });
        BipartiteVector { dim_a: xi.len(), dim_b: eta.len(), amplitudes }
    }

    pub fn norm(&self) -> f64 {
        vector_norm(&self.amplitudes)
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= STATE_TOL
    }

    /// The `dim_a × dim_b` coefficient matrix `M` with `vec(M) = ψ`.
    pub fn coefficient_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim_a, self.dim_b, |a, b| self.amplitudes[a * self.dim_b + b])
    }

    /// `(X ⊗ Y) ψ`, evaluated as `vec(X M Yᵀ)`.
    pub fn apply_local(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<BipartiteVector> {
        if x.ncols() != self.dim_a || y.ncols() != self.dim_b {
            return Err(Error::InvalidShape(format!(
                "operators {}x{} ⊗ {}x{} on a {}x{} vector",
                x.nrows(),
                x.ncols(),
                y.nrows(),
                y.ncols(),
                self.dim_a,
                self.dim_b
            )));
        }
        let m = self.coefficient_matrix();
        Ok(vec_of(&(x * m * y.transpose())))
    }

    pub fn apply_alice(&self, x: &ComplexMatrix) -> Result<BipartiteVector> {
        self.apply_local(x, &identity(self.dim_b))
    }

    pub fn apply_bob(&self, y: &ComplexMatrix) -> Result<BipartiteVector> {
        self.apply_local(&identity(self.dim_a), y)
    }

    pub fn density(&self) -> ComplexMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn reduced_a(&self) -> DensityView {
        let m = self.coefficient_matrix();
        DensityView { matrix: &m * m.adjoint() }
    }

    /// `ρ_B = Mᵀ M̄` for `ψ = vec(M)`.
    pub fn reduced_b(&self) -> DensityView {
        let m = self.coefficient_matrix();
        DensityView { matrix: m.transpose() * m.conjugate() }
    }
}

/// Row-major flattening `vec(E_ij) = e_i ⊗ e_j`.
pub fn vec_of(d: &ComplexMatrix) -> BipartiteVector {
    let (rows, cols) = d.shape();
    let amplitudes = ComplexVector::from_fn(rows * cols, |idx, _| d[(idx / cols, idx % cols)]);
    BipartiteVector { dim_a: rows, dim_b: cols, amplitudes }
}

/// `φ_d = (1/√d) Σ e_i ⊗ e_i`.
pub fn maximally_entangled(d: usize) -> Result<BipartiteVector> {
    if d == 0 {
        return Err(Error::InvalidDimension("maximally entangled state needs d >= 1".into()));
    }
    let scale = 1.0 / (d as f64).sqrt();
    Ok(vec_of(&(identity(d) * real(scale))))
}

/// Rotates `v` so its largest-magnitude component (first one on ties) is
/// real and positive.
pub fn fix_phase(v: &mut ComplexVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

/// Singular value decomposition with singular values sorted descending.
/// `u` is `rows × rank_cap`, `v` is `cols × rank_cap` where
/// `rank_cap = min(rows, cols)`; `a = u diag(s) v*`.
pub struct SortedSvd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn sorted_svd(a: &ComplexMatrix) -> SortedSvd {
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested Vt").adjoint();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let u_sorted = ComplexMatrix::from_fn(u.nrows(), order.len(), |r, k| u[(r, order[k])]);
    let v_sorted = ComplexMatrix::from_fn(v.nrows(), order.len(), |r, k| v[(r, order[k])]);
    SortedSvd {
        u: u_sorted,
        singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
        v: v_sorted,
    }
}

/// Schmidt coefficients with matching orthonormal left/right vectors.
/// Right vectors are stored already conjugated, so
/// `ψ = Σ α_l ξ_l ⊗ η_l` holds literally.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<ComplexVector>,
    pub right_vectors: Vec<ComplexVector>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn reconstruct(&self, dim_a: usize, dim_b: usize) -> BipartiteVector {
        let mut amplitudes = ComplexVector::zeros(dim_a * dim_b);
        for ((alpha, xi), eta) in self
            .coefficients
            .iter()
            .zip(&self.left_vectors)
            .zip(&self.right_vectors)
        {
            amplitudes += BipartiteVector::product(xi, eta).amplitudes * real(*alpha);
        }
        BipartiteVector { dim_a, dim_b, amplitudes }
    }
}

pub fn schmidt(psi: &BipartiteVector) -> Result<SchmidtDecomposition> {
    if psi.norm() == 0.0 {
        return Err(Error::InvalidState("Schmidt decomposition of the zero vector".into()));
    }
    let svd = sorted_svd(&psi.coefficient_matrix());
    let cutoff = SCHMIDT_RANK_TOL * svd.singular_values[0];
    let mut decomposition = SchmidtDecomposition {
        coefficients: Vec::new(),
        left_vectors: Vec::new(),
        right_vectors: Vec::new(),
    };
    for (l, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= cutoff {
            break;
        }
        // M = Σ σ u vᴴ  ⇒  vec(M) = Σ σ u ⊗ v̄.
        let mut xi = svd.u.column(l).into_owned();
        let mut eta = svd.v.column(l).map(|z| z.conj());
        // Phase fixed on ξ; the opposite phase goes to η.
        let before = xi.clone();
        fix_phase(&mut xi);
        let pivot = (0..xi.len()).find(|&i| before[i].norm() > 0.0).unwrap_or(0);
        let rotation = if before[pivot].norm() > 0.0 { xi[pivot] / before[pivot] } else { ONE };
        eta *= rotation.conj();
        decomposition.coefficients.push(sigma);
        decomposition.left_vectors.push(xi);
        decomposition.right_vectors.push(eta);
    }
    Ok(decomposition)
}

/// Which tensor factor a partial trace keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// A positive-semidefinite unit-trace matrix.
#[derive(Clone, Debug)]
pub struct DensityView {
    matrix: ComplexMatrix,
}

impl DensityView {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidShape("density matrix must be square".into()));
        }
        if hermitian_defect(&matrix) > HERMITIAN_TOL {
            return Err(Error::InvalidInput("density matrix is not Hermitian".into()));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidInput(format!("density matrix has trace {tr}")));
        }
        let (values, _) = hermitian_eig(&matrix)?;
        if values.last().copied().unwrap_or(0.0) < -DENSITY_TOL {
            return Err(Error::InvalidInput("density matrix has a negative eigenvalue".into()));
        }
        Ok(DensityView { matrix })
    }

    pub fn pure(psi: &BipartiteVector) -> Self {
        DensityView { matrix: psi.density() }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityView { matrix: identity(d) * real(1.0 / d as f64) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Positive square root `ρ^{1/2}`.
    pub fn sqrt(&self) -> ComplexMatrix {
        psd_sqrt(&self.matrix)
    }
}

/// `tr_B` (keep A) or `tr_A` (keep B) of a state on `C^{dA} ⊗ C^{dB}`.
pub fn partial_trace(rho: &DensityView, dims: (usize, usize), keep: Side) -> Result<DensityView> {
    let (da, db) = dims;
    if rho.dim() != da * db {
        return Err(Error::InvalidShape(format!(
            "density of dimension {} cannot be split as {}x{}",
            rho.dim(),
            da,
            db
        )));
    }
    let m = rho.matrix();
    let matrix = match keep {
        Side::A => ComplexMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Side::B => ComplexMatrix::from_fn(db, db, |k, l| (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()),
    };
    Ok(DensityView { matrix })
}

/// `⟨X, Y⟩_ρ = tr(Y* X ρ)`.
pub fn semi_inner(x: &ComplexMatrix, y: &ComplexMatrix, rho: &DensityView) -> Result<C64> {
    let d = rho.dim();
    if x.shape() != (d, d) || y.shape() != (d, d) {
        return Err(Error::InvalidShape(format!(
            "state seminorm on {d}x{d} applied to {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    Ok(trace(&(y.adjoint() * x * rho.matrix())))
}

/// `‖X‖_ρ = √tr(X* X ρ)`.
pub fn seminorm(x: &ComplexMatrix, rho: &DensityView) -> Result<f64> {
    Ok(semi_inner(x, x, rho)?.re.max(0.0).sqrt())
}

/// Orthonormal basis (as columns) of the null space of `a`, using singular
/// values above `tol · σ_max` as the numerical rank.
pub fn null_space(a: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    // Pad to at least square so the SVD returns a full right basis.
    let padded_rows = rows.max(cols);
    let mut padded = ComplexMatrix::zeros(padded_rows, cols);
    padded.view_mut((0, 0), (rows, cols)).copy_from(a);
    let svd = sorted_svd(&padded);
    let sigma_max = svd.singular_values.first().copied().unwrap_or(0.0);
    let rank = if sigma_max == 0.0 {
        0
    } else {
        svd.singular_values.iter().filter(|&&s| s > tol * sigma_max).count()
    };
    let mut basis = ComplexMatrix::zeros(cols, cols - rank);
    for (k, col) in (rank..cols).enumerate() {
        let mut v = svd.v.column(col).into_owned();
        fix_phase(&mut v);
        basis.set_column(k, &v);
    }
    basis
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues descending and
/// the matching orthonormal eigenvectors as columns.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::InvalidInput("eigendecomposition of a non-square matrix".into()));
    }
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if hermitian_defect(a) > HERMITIAN_TOL * scale {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (defect {:.3e})",
            hermitian_defect(a)
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let sym = (a + a.adjoint()) * real(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        fix_phase(&mut v);
        vectors.set_column(k, &v);
    }
    Ok((values, vectors))
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(a: &ComplexMatrix, f: impl Fn(f64) -> C64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eig(a)?;
    let diag = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        values.len(),
        values.iter().map(|&l| f(l)),
    ));
    Ok(&vectors * diag * vectors.adjoint())
}

/// Square root of a positive-semidefinite matrix; tiny negative eigenvalues
/// from roundoff are clamped to zero.
pub fn psd_sqrt(a: &ComplexMatrix) -> ComplexMatrix {
    let sym = (a + a.adjoint()) * real(0.5);
    hermitian_function(&sym, |l| real(l.max(0.0).sqrt())).expect("symmetrised input is Hermitian")
}

/// Nearest isometry (polar factor) of a tall matrix `t = U Σ W*`: `U W*`.
/// Returns the factor together with the smallest singular value of `t`.
pub fn polar_isometry(t: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let svd = sorted_svd(t);
    let smallest = svd.singular_values.last().copied().unwrap_or(0.0);
    (&svd.u * svd.v.adjoint(), smallest)
}

/// `‖V*V − I‖_F`.
pub fn isometry_defect(v: &ComplexMatrix) -> f64 {
    frobenius(&(v.adjoint() * v - identity(v.ncols())))
}

/// Reorders a vector on `(C^{dA}⊗C^{kA}) ⊗ (C^{dB}⊗C^{kB})` into
/// `(C^{dA}⊗C^{dB}) ⊗ (C^{kA}⊗C^{kB})` by swapping the middle factors.
pub fn swap_middle(v: &ComplexVector, da: usize, ka: usize, db: usize, kb: usize) -> ComplexVector {
    assert_eq!(v.len(), da * ka * db * kb);
    let mut out = ComplexVector::zeros(v.len());
    for a in 0..da {
        for i in 0..ka {
            for b in 0..db {
                for j in 0..kb {
                    let src = (a * ka + i) * (db * kb) + (b * kb + j);
                    let dst = (a * db + b) * (ka * kb) + (i * kb + j);
                    out[dst] = v[src];
                }
            }
        }
    }
    out
}
