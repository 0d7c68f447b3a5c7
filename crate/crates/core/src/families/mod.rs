//! Scalar sets Λ_n and families of projections summing to `x·I`.

mod rational;

pub use rational::Rational;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::json;
use crate::matcore::{
    frobenius, hermitian_eig, identity, real, sorted_svd, null_space, trace, ComplexMatrix,
    ComplexVector,
};

/// Default tolerance for all family invariants.
pub const PROJ_TOL: f64 = 1e-9;

/// `n` projections in `M_d` claimed to sum to `x·I_d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectionFamily {
    pub n: usize,
    pub x: Rational,
    pub d: usize,
    #[serde(with = "json::matrix_list")]
    pub projections: Vec<ComplexMatrix>,
}

impl ProjectionFamily {
    /// Checks only shapes; use [`validate_family`] for the algebraic invariants.
    pub fn new(x: Rational, projections: Vec<ComplexMatrix>) -> Result<Self> {
        let n = projections.len();
        if n < 3 {
            return Err(Error::UnsupportedN(n));
        }
        let d = projections[0].nrows();
        if d == 0 {
            return Err(Error::InvalidDimension("projections must be at least 1x1".into()));
        }
        if let Some(v) = projections.iter().position(|p| p.shape() != (d, d)) {
            return Err(Error::InvalidShape(format!(
                "projection {v} is {:?}, expected {d}x{d}",
                projections[v].shape()
            )));
        }
        Ok(ProjectionFamily { n, x, d, projections })
    }

    /// Re-checks shape metadata after deserialisation.
    pub fn check_shape(&self) -> Result<()> {
        let rebuilt = ProjectionFamily::new(self.x.clone(), self.projections.clone())?;
        if rebuilt.n != self.n || rebuilt.d != self.d {
            return Err(Error::InvalidShape(format!(
                "metadata says n={}, d={} but projections give n={}, d={}",
                self.n, self.d, rebuilt.n, rebuilt.d
            )));
        }
        Ok(())
    }

    pub fn transposed(&self) -> Vec<ComplexMatrix> {
        self.projections.iter().map(|p| p.transpose()).collect()
    }
}

/// First `count` terms of the recurrence `x_0 = 0`, `x_l = 1 + 1/(n−1−x_{l−1})`.
/// For `n = 3` the set is the single value `3/2`.
pub fn lambda_sequence(n: usize, count: usize) -> Result<Vec<Rational>> {
    if n < 3 {
        return Err(Error::UnsupportedN(n));
    }
    if n == 3 {
        return Ok(vec![Rational::new(3, 2)?]);
    }
    let n_minus_1 = Rational::from_integer(n as i64 - 1);
    let mut out = Vec::with_capacity(count);
    let mut x = Rational::zero();
    for _ in 0..count {
        out.push(x.clone());
        x = Rational::one() + (&n_minus_1 - &x).recip()?;
    }
    Ok(out)
}

/// Exact membership test for Λ_n.
pub fn in_lambda(n: usize, x: &Rational) -> Result<bool> {
    if n < 3 {
        return Err(Error::UnsupportedN(n));
    }
    if n == 3 {
        return Ok(*x == Rational::new(3, 2)?);
    }
    if x.is_negative() {
        return Ok(false);
    }
    let nr = Rational::from_integer(n as i64);
    if n == 4 {
        // x = 4k/(2k+1)  ⇔  k = x/(4 − 2x) is a non-negative integer.
        let two = Rational::from_integer(2);
        if *x >= two {
            return Ok(false);
        }
        return Ok((x / &(Rational::from_integer(4) - &two * x)).is_integer());
    }
    // The sequence increases to the smaller root of y² − n y + n; anything at
    // or beyond that root is excluded, everything below is reached or skipped.
    let half_n = &nr / &Rational::from_integer(2);
    if *x >= half_n || &(x * x) - &(&nr * x) + nr.clone() <= Rational::zero() {
        return Ok(false);
    }
    let n_minus_1 = &nr - &Rational::one();
    let mut term = Rational::zero();
    loop {
        if term == *x {
            return Ok(true);
        }
        if term > *x {
            return Ok(false);
        }
        term = Rational::one() + (&n_minus_1 - &term).recip()?;
    }
}

/// `x·d/n`, the common rank of every projection when `d` is the denominator.
pub fn expected_rank(n: usize, x: &Rational, d: usize) -> Option<usize> {
    (x * &Rational::from_integer(d as i64) / Rational::from_integer(n as i64)).to_usize()
}

fn rank_one(xi: &ComplexVector) -> ComplexMatrix {
    xi * xi.adjoint()
}

fn symmetrize(p: &ComplexMatrix) -> ComplexMatrix {
    (p + p.adjoint()) * real(0.5)
}

/// Unit vectors of a regular simplex in `R^{n−1}`: Gram–Schmidt on
/// `e_v − 𝟙/n`, so the first vertex is `e_1` and `⟨ξ_v, ξ_w⟩ = −1/(n−1)`.
pub fn simplex_vectors(n: usize) -> Result<Vec<ComplexVector>> {
    if n < 3 {
        return Err(Error::UnsupportedN(n));
    }
    let nf = n as f64;
    let centered: Vec<Vec<f64>> = (0..n)
        .map(|v| (0..n).map(|j| if j == v { 1.0 - 1.0 / nf } else { -1.0 / nf }).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in centered.iter().take(n - 1) {
        let mut u = c.clone();
        for b in &basis {
            let proj = dot(&u, b);
            u.iter_mut().zip(b).for_each(|(ui, bi)| *ui -= proj * bi);
        }
        let norm = dot(&u, &u).sqrt();
        basis.push(u.into_iter().map(|ui| ui / norm).collect());
    }
    let scale = ((nf - 1.0) / nf).sqrt();
    Ok(centered
        .iter()
        .map(|c| ComplexVector::from_iterator(n - 1, basis.iter().map(|b| real(dot(c, b) / scale))))
        .collect())
}

/// `n` rank-one projections in `M_{n−1}` summing to `(n/(n−1))·I`.
pub fn simplex_family(n: usize) -> Result<ProjectionFamily> {
    let vectors = simplex_vectors(n)?;
    ProjectionFamily::new(
        Rational::new(n as i64, n as i64 - 1)?,
        vectors.iter().map(rank_one).collect(),
    )
}

/// The four tetrahedron vertices used as the base case of the `n = 4` recursion.
pub fn tetrahedron_vectors() -> Vec<ComplexVector> {
    let s2 = 2f64.sqrt();
    let s23 = (2.0 / 3.0f64).sqrt();
    [
        [1.0, 0.0, 0.0],
        [-1.0 / 3.0, 2.0 * s2 / 3.0, 0.0],
        [-1.0 / 3.0, -s2 / 3.0, s23],
        [-1.0 / 3.0, -s2 / 3.0, -s23],
    ]
    .iter()
    .map(|v| ComplexVector::from_iterator(3, v.iter().map(|&a| real(a))))
    .collect()
}

/// Level-`k` parameters of the `n = 4` family: `x = 4k/(2k+1)`, `d = 2k+1`.
fn four_level(fam: &ProjectionFamily) -> Result<usize> {
    if fam.n != 4 || fam.d.is_multiple_of(2) {
        return Err(Error::InvalidFamily(format!(
            "expected four projections in odd dimension, got n={}, d={}",
            fam.n, fam.d
        )));
    }
    let k = (fam.d - 1) / 2;
    if k == 0 || fam.x != Rational::new(4 * k as i64, 2 * k as i64 + 1)? {
        return Err(Error::InvalidFamily(format!(
            "x = {} does not match level {k} (expected {}/{})",
            fam.x,
            4 * k,
            2 * k + 1
        )));
    }
    Ok(k)
}

/// One step of the `n = 4` recursion: level `k` in `M_{2k+1}` to level `k+1`
/// in `M_{2k+3}`.
pub fn four_family_step(fam: &ProjectionFamily) -> Result<ProjectionFamily> {
    let k = four_level(fam)?;
    let report = validate_family(fam, 1e-8);
    if !report.pass {
        return Err(Error::InvalidFamily(report.failures.join("; ")));
    }
    let d = fam.d;
    let block = k + 1;
    let mut gamma1 = ComplexMatrix::zeros(d, 4 * block);
    for (v, p) in fam.projections.iter().enumerate() {
        let q = identity(d) - p;
        let svd = sorted_svd(&q);
        let range: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 0.5).collect();
        if range.len() != block {
            return Err(Error::InvalidFamily(format!(
                "complement of projection {v} has rank {}, expected {block}",
                range.len()
            )));
        }
        for (c, &i) in range.iter().enumerate() {
            gamma1.set_column(v * block + c, &svd.u.column(i));
        }
    }
    let eta = null_space(&gamma1, 1e-10);
    let d_next = 2 * k + 3;
    if eta.ncols() != d_next {
        return Err(Error::DegenerateInput(format!(
            "null space of the joined range bases has dimension {}, expected {d_next}",
            eta.ncols()
        )));
    }
    // Rows of Γ₂ are ηᵢᵀ.
    let gamma2 = eta.transpose();
    let x_next = Rational::new(4 * block as i64, d_next as i64)?;
    let scale = real(x_next.to_f64());
    let projections = (0..4)
        .map(|v| {
            let r = gamma2.columns(v * block, block);
            symmetrize(&(r * r.adjoint() * scale))
        })
        .collect();
    let out = ProjectionFamily::new(x_next, projections)?;
    let report = validate_family(&out, 1e-8);
    if !report.pass {
        return Err(Error::DegenerateInput(report.failures.join("; ")));
    }
    Ok(out)
}

/// Four rank-`k` projections in `M_{2k+1}` summing to `(4k/(2k+1))·I`.
pub fn four_family(k: usize) -> Result<ProjectionFamily> {
    if k == 0 {
        return Err(Error::InvalidInput("four-projection level must be k >= 1".into()));
    }
    let mut fam = ProjectionFamily::new(
        Rational::new(4, 3)?,
        tetrahedron_vectors().iter().map(rank_one).collect(),
    )?;
    for _ in 1..k {
        fam = four_family_step(&fam)?;
    }
    Ok(fam)
}

/// The constructible family for `(n, k)`: the recursive family for `n = 4`,
/// otherwise the simplex family (`k = 1` only).
pub fn family_for(n: usize, k: usize) -> Result<ProjectionFamily> {
    match (n, k) {
        (4, _) => four_family(k),
        (_, 1) => simplex_family(n),
        _ => Err(Error::InvalidInput(format!(
            "for n = {n} only the simplex family (k = 1) is constructed, got k = {k}"
        ))),
    }
}

/// Measured invariants of a projection family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyReport {
    pub tol: f64,
    pub in_lambda: bool,
    /// `‖P_v² − P_v‖_F`.
    pub idempotency: Vec<f64>,
    /// `‖P_v − P_v*‖_F`.
    pub hermiticity: Vec<f64>,
    /// `‖Σ P_v − x·I‖_F`.
    pub sum_residual: f64,
    /// Number of eigenvalues above 1/2.
    pub ranks: Vec<usize>,
    pub expected_rank: Option<usize>,
    /// `tr(P_v P_w)/d`.
    pub trace_table: Vec<Vec<f64>>,
    /// Max deviation of the diagonal from `x/n`.
    pub diagonal_deviation: f64,
    /// Max deviation off the diagonal from `x(x−1)/(n(n−1))`.
    pub off_diagonal_deviation: f64,
    pub pass: bool,
    /// Names of violated invariants.
    pub failures: Vec<String>,
}

pub fn validate_family(fam: &ProjectionFamily, tol: f64) -> FamilyReport {
    let n = fam.n;
    let d = fam.d;
    let x = fam.x.to_f64();
    let in_lambda = in_lambda(n, &fam.x).unwrap_or(false);
    let idempotency: Vec<f64> = fam.projections.iter().map(|p| frobenius(&(p * p - p))).collect();
    let hermiticity: Vec<f64> = fam.projections.iter().map(|p| frobenius(&(p - p.adjoint()))).collect();
    let sum: ComplexMatrix = fam.projections.iter().sum();
    let sum_residual = frobenius(&(sum - identity(d) * real(x)));
    let ranks: Vec<usize> = fam
        .projections
        .iter()
        .map(|p| {
            hermitian_eig(&symmetrize(p))
                .map(|(vals, _)| vals.iter().filter(|&&l| l > 0.5).count())
                .unwrap_or(0)
        })
        .collect();
    let trace_table: Vec<Vec<f64>> = fam
        .projections
        .iter()
        .map(|p| fam.projections.iter().map(|q| trace(&(p * q)).re / d as f64).collect())
        .collect();
    let nf = n as f64;
    let diag_expected = x / nf;
    let off_expected = x * (x - 1.0) / (nf * (nf - 1.0));
    let mut diagonal_deviation: f64 = 0.0;
    let mut off_diagonal_deviation: f64 = 0.0;
    for v in 0..n {
        for w in 0..n {
            if v == w {
                diagonal_deviation = diagonal_deviation.max((trace_table[v][w] - diag_expected).abs());
            } else {
                off_diagonal_deviation = off_diagonal_deviation.max((trace_table[v][w] - off_expected).abs());
            }
        }
    }

    let mut failures = Vec::new();
    let worst = |xs: &[f64]| xs.iter().cloned().fold(0.0, f64::max);
    if worst(&idempotency) > tol {
        failures.push(format!("idempotency residual {:.3e} exceeds {tol:e}", worst(&idempotency)));
    }
    if worst(&hermiticity) > tol {
        failures.push(format!("hermiticity residual {:.3e} exceeds {tol:e}", worst(&hermiticity)));
    }
    if sum_residual > tol {
        failures.push(format!("sum residual {sum_residual:.3e} exceeds {tol:e}"));
    }
    let mut expected_rank = None;
    if in_lambda {
        if fam.denominator_mismatch() {
            failures.push(format!("dimension {d} differs from the denominator of x = {}", fam.x));
        }
        expected_rank = expected_rank_of(fam);
        match expected_rank {
            Some(r) if ranks.iter().all(|&got| got == r) => {}
            _ => failures.push(format!("ranks {ranks:?} differ from x·d/n")),
        }
        if diagonal_deviation > tol {
            failures.push(format!("diagonal trace deviation {diagonal_deviation:.3e} exceeds {tol:e}"));
        }
        if off_diagonal_deviation > tol {
            failures.push(format!("off-diagonal trace deviation {off_diagonal_deviation:.3e} exceeds {tol:e}"));
        }
    }
    FamilyReport {
        tol,
        in_lambda,
        idempotency,
        hermiticity,
        sum_residual,
        ranks,
        expected_rank,
        trace_table,
        diagonal_deviation,
        off_diagonal_deviation,
        pass: failures.is_empty(),
        failures,
    }
}

impl ProjectionFamily {
    fn denominator_mismatch(&self) -> bool {
        self.x.denom_usize() != Some(self.d)
    }
}

fn expected_rank_of(fam: &ProjectionFamily) -> Option<usize> {
    expected_rank(fam.n, &fam.x, fam.d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::random::{random_hermitian, seeded};
    use crate::matcore::{from_real_rows, inner};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_sequence(3, 5).unwrap(), vec![r(3, 2)]);
        assert_eq!(lambda_sequence(4, 4).unwrap(), vec![r(0, 1), r(4, 3), r(8, 5), r(12, 7)]);
        assert_eq!(lambda_sequence(5, 3).unwrap(), vec![r(0, 1), r(5, 4), r(15, 11)]);
        assert!(matches!(lambda_sequence(2, 3), Err(Error::UnsupportedN(2))));
    }

    #[test]
    fn lambda_four_closed_form() {
        let seq = lambda_sequence(4, 51).unwrap();
        for (k, x) in seq.iter().enumerate() {
            assert_eq!(*x, r(4 * k as i64, 2 * k as i64 + 1));
        }
    }

    #[test]
    fn membership() {
        assert!(in_lambda(3, &r(3, 2)).unwrap());
        assert!(!in_lambda(3, &r(0, 1)).unwrap());
        assert!(in_lambda(4, &r(8, 5)).unwrap());
        assert!(in_lambda(4, &r(0, 1)).unwrap());
        assert!(!in_lambda(4, &r(3, 2)).unwrap());
        assert!(!in_lambda(4, &r(2, 1)).unwrap());
        assert!(in_lambda(5, &r(15, 11)).unwrap());
        assert!(in_lambda(5, &r(5, 4)).unwrap());
        assert!(!in_lambda(5, &r(4, 3)).unwrap());
        assert!(!in_lambda(5, &r(3, 1)).unwrap());
        for n in 4..9 {
            for x in lambda_sequence(n, 6).unwrap() {
                assert!(in_lambda(n, &x).unwrap(), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn simplex_three_matches_displayed_triangle() {
        let fam = simplex_family(3).unwrap();
        let s = 3f64.sqrt();
        let expected = [
            from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            from_real_rows(2, 2, &[0.25, -s / 4.0, -s / 4.0, 0.75]),
            from_real_rows(2, 2, &[0.25, s / 4.0, s / 4.0, 0.75]),
        ];
        for (p, e) in fam.projections.iter().zip(&expected) {
            assert!(frobenius(&(p - e)) < 1e-14);
        }
        let vs = simplex_vectors(3).unwrap();
        for v in 0..3 {
            for w in 0..3 {
                if v != w {
                    assert!((inner(&vs[v], &vs[w]).norm() - 0.5).abs() < 1e-14);
                }
            }
        }
        let report = validate_family(&fam, 1e-12);
        assert!(report.pass, "{:?}", report.failures);
        assert!((report.trace_table[0][0] - 0.5).abs() < 1e-12);
        assert!((report.trace_table[0][1] - 0.125).abs() < 1e-12);
    }

    #[test]
    fn simplex_six_traces() {
        let fam = simplex_family(6).unwrap();
        let report = validate_family(&fam, 1e-12);
        assert!(report.pass, "{:?}", report.failures);
        assert_eq!(report.ranks, vec![1; 6]);
        // tr(P_v P_w) = |⟨ξ_v, ξ_w⟩|² = 1/25; normalised by d = 5.
        assert!((report.trace_table[1][4] - 1.0 / 125.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_four_is_tetrahedron() {
        let fam = simplex_family(4).unwrap();
        for (p, xi) in fam.projections.iter().zip(tetrahedron_vectors()) {
            assert!(frobenius(&(p - rank_one(&xi))) < 1e-14);
        }
    }

    #[test]
    fn tetrahedron_base_case() {
        let vs = tetrahedron_vectors();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { -1.0 / 3.0 };
                assert!((inner(&vs[i], &vs[j]).re - expected).abs() < 1e-15);
            }
        }
        let fam = four_family(1).unwrap();
        assert_eq!(fam.projections[0], from_real_rows(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        let report = validate_family(&fam, 1e-12);
        assert!(report.pass, "{:?}", report.failures);
        assert!((report.trace_table[0][0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((report.trace_table[2][3] - 1.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn step_to_level_two() {
        let fam = four_family(2).unwrap();
        assert_eq!((fam.d, fam.x.clone()), (5, r(8, 5)));
        let report = validate_family(&fam, 1e-9);
        assert!(report.pass, "{:?}", report.failures);
        assert_eq!(report.ranks, vec![2; 4]);
        for v in 0..4 {
            for w in 0..4 {
                if v != w {
                    assert!((report.trace_table[v][w] * 5.0 - 0.4).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn higher_levels_validate() {
        for k in 3..=5 {
            let fam = four_family(k).unwrap();
            let report = validate_family(&fam, 1e-9);
            assert!(report.pass, "k={k}: {:?}", report.failures);
            assert_eq!(report.ranks, vec![k; 4]);
        }
    }

    #[test]
    fn step_rejects_bad_input() {
        let simplex = simplex_family(5).unwrap();
        assert!(matches!(four_family_step(&simplex), Err(Error::InvalidFamily(_))));
        let mut broken = four_family(1).unwrap();
        broken.projections[0][(1, 1)] = real(0.5);
        assert!(matches!(four_family_step(&broken), Err(Error::InvalidFamily(_))));
        assert!(four_family(0).is_err());
    }

    #[test]
    fn perturbation_is_reported() {
        let mut fam = four_family(1).unwrap();
        let h = random_hermitian(3, &mut seeded(5));
        fam.projections[1] += h * real(1e-3);
        let report = validate_family(&fam, 1e-6);
        assert!(!report.pass);
        let idem = report.idempotency[1];
        assert!(idem > 1e-4 && idem < 1e-2, "{idem}");
        assert!(report.idempotency[0] < 1e-12);
    }

    #[test]
    fn family_selection() {
        assert_eq!(family_for(4, 3).unwrap().d, 7);
        assert_eq!(family_for(5, 1).unwrap().d, 4);
        assert!(family_for(5, 2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let fam = four_family(2).unwrap();
        let text = serde_json::to_string(&fam).unwrap();
        let back: ProjectionFamily = serde_json::from_str(&text).unwrap();
        back.check_shape().unwrap();
        assert_eq!(back.x, fam.x);
        assert_eq!(back.projections, fam.projections);
    }
}
