use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{within, DEFAULT_MONOMIAL_DEGREE, MAX_MONOMIAL_PAIRS};
use crate::error::{Error, Result};
use crate::families::Rational;
use crate::matcore::{identity, real, seminorm, vector_norm, ComplexMatrix, DensityView};
use crate::strategies::{
    correlation_distance, ideal_correlation, induced_correlation, synchronicity_defect, Correlation, Strategy,
    CORR_TOL,
};

/// The five quantities bounding how synchronous question `v`, outcome `i` is.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SyncBounds {
    pub question: usize,
    pub outcome: usize,
    /// `‖(E⊗I)ψ − (I⊗F)ψ‖`
    pub a: f64,
    /// `‖(E⊗I)ψ − (E⊗F)ψ‖`
    pub b: f64,
    /// `‖(I⊗F)ψ − (E⊗F)ψ‖`
    pub c: f64,
    /// `‖E − E²‖_{ρ_A}`
    pub d: f64,
    /// `‖F − F²‖_{ρ_B}`
    pub e: f64,
    /// `√δ`, the budget for `a`–`c`.
    pub vector_budget: f64,
    /// `2√δ`, the budget for `d`–`e`.
    pub operator_budget: f64,
}

impl SyncBounds {
    pub fn max(&self) -> f64 {
        [self.a, self.b, self.c, self.d, self.e].into_iter().fold(0.0, f64::max)
    }

    pub fn pass(&self) -> bool {
        [self.a, self.b, self.c].iter().all(|&q| within(q, self.vector_budget))
            && [self.d, self.e].iter().all(|&q| within(q, self.operator_budget))
    }
}

/// Relation residuals for one party's outcome-1 operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RepResiduals {
    /// `max_v ‖E_v − E_v*‖_ρ`
    pub hermiticity: f64,
    /// `max_v ‖E_v² − E_v‖_ρ`
    pub idempotency: f64,
    /// `‖Σ_v E_v − x I‖_ρ`
    pub sum: f64,
}

impl RepResiduals {
    pub fn max(&self) -> f64 {
        self.hermiticity.max(self.idempotency).max(self.sum)
    }
}

/// Commutator trace defects over all pairs of monomials up to a degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TracialReport {
    pub degree: usize,
    /// Pairs examined per party.
    pub pairs: usize,
    /// `max |tr_{ρ_A}(W₁W₂ − W₂W₁)|` over Alice's monomials.
    pub alice: f64,
    /// The same for Bob.
    pub bob: f64,
    /// Largest `defect − 2·min(ℓ₁,ℓ₂)·√δ` over all pairs of both parties.
    pub worst_excess: f64,
    pub pass: bool,
}

impl TracialReport {
    pub fn max(&self) -> f64 {
        self.alice.max(self.bob)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResidualReport {
    /// `‖p − p̃_{n,x}‖₁`
    pub delta: f64,
    pub sync_bounds: Vec<SyncBounds>,
    pub sync_max: f64,
    pub lemma35_pass: bool,
    pub rep_residuals_a: RepResiduals,
    pub rep_residuals_b: RepResiduals,
    /// `C·δ^{1/4}` with `C = √(n² + (1+2x)√δ)`.
    pub c_bound: f64,
    pub lemma63_pass: bool,
    pub tracial: TracialReport,
    pub lemma37_pass: bool,
}

impl ResidualReport {
    /// Largest relation residual over both parties.
    pub fn rep_max(&self) -> f64 {
        self.rep_residuals_a.max().max(self.rep_residuals_b.max())
    }

    pub fn pass(&self) -> bool {
        self.lemma35_pass && self.lemma63_pass && self.lemma37_pass
    }
}

fn require_two_outcomes(s: &Strategy) -> Result<()> {
    match s.outcomes() {
        2 => Ok(()),
        k => Err(Error::UnsupportedOutcomes(k)),
    }
}

/// All residuals of `S` against the relations `r_v = r_v* = r_v²`,
/// `Σ r_v = x·1`, using the default monomial degree.
pub fn approx_rep_residuals(s: &Strategy, x: &Rational) -> Result<ResidualReport> {
    residual_report(s, x, DEFAULT_MONOMIAL_DEGREE)
}

pub fn residual_report(s: &Strategy, x: &Rational, degree: usize) -> Result<ResidualReport> {
    require_two_outcomes(s)?;
    let n = s.questions();
    let ideal = ideal_correlation(n, x)?;
    let p = induced_correlation(s)?;
    let delta = correlation_distance(&p, &ideal)?;
    let sync_bounds = sync_bounds_against(s, delta)?;
    let sync_max = sync_bounds.iter().map(SyncBounds::max).fold(0.0, f64::max);
    let lemma35_pass = sync_bounds.iter().all(SyncBounds::pass);

    let xf = x.to_f64();
    let rep_residuals_a = relation_residuals(&s.alice_first(), xf, &s.state.reduced_a())?;
    let rep_residuals_b = relation_residuals(&s.bob_first(), xf, &s.state.reduced_b())?;
    let c = (n as f64 * n as f64 + (1.0 + 2.0 * xf) * delta.sqrt()).sqrt();
    let c_bound = c * delta.powf(0.25);
    let lemma63_pass = within(rep_residuals_a.max(), c_bound) && within(rep_residuals_b.max(), c_bound);

    let tracial = tracial_audit(s, degree, delta)?;
    let lemma37_pass = tracial.pass;
    Ok(ResidualReport {
        delta,
        sync_bounds,
        sync_max,
        lemma35_pass,
        rep_residuals_a,
        rep_residuals_b,
        c_bound,
        lemma63_pass,
        tracial,
        lemma37_pass,
    })
}

fn relation_residuals(ops: &[ComplexMatrix], x: f64, rho: &DensityView) -> Result<RepResiduals> {
    let mut hermiticity: f64 = 0.0;
    let mut idempotency: f64 = 0.0;
    let dim = rho.dim();
    let mut total = ComplexMatrix::zeros(dim, dim);
    for e in ops {
        hermiticity = hermiticity.max(seminorm(&(e - e.adjoint()), rho)?);
        idempotency = idempotency.max(seminorm(&(e * e - e), rho)?);
        total += e;
    }
    let sum = seminorm(&(total - identity(dim) * real(x)), rho)?;
    Ok(RepResiduals { hermiticity, idempotency, sum })
}

/// Per `(v, i)` synchronicity quantities of `S`, budgeted by
/// `δ = ‖p − reference‖₁`.
pub fn sync_residuals(s: &Strategy, reference: &Correlation) -> Result<Vec<SyncBounds>> {
    let defect = synchronicity_defect(reference);
    if defect > CORR_TOL {
        return Err(Error::InvalidReference(format!(
            "reference correlation is not synchronous (defect {defect:.3e})"
        )));
    }
    let p = induced_correlation(s)?;
    let delta = correlation_distance(&p, reference)
        .map_err(|e| Error::InvalidReference(format!("reference does not match the strategy: {e}")))?;
    sync_bounds_against(s, delta)
}

fn sync_bounds_against(s: &Strategy, delta: f64) -> Result<Vec<SyncBounds>> {
    let rho_a = s.state.reduced_a();
    let rho_b = s.state.reduced_b();
    let root = delta.sqrt();
    let mut out = Vec::with_capacity(s.questions() * s.outcomes());
    for v in 0..s.questions() {
        for i in 0..s.outcomes() {
            let e = &s.alice[v][i];
            let f = &s.bob[v][i];
            let e_psi = s.state.apply_alice(e)?.amplitudes;
            let f_psi = s.state.apply_bob(f)?.amplitudes;
            let ef_psi = s.state.apply_local(e, f)?.amplitudes;
            out.push(SyncBounds {
                question: v,
                outcome: i,
                a: vector_norm(&(&e_psi - &f_psi)),
                b: vector_norm(&(&e_psi - &ef_psi)),
                c: vector_norm(&(&f_psi - &ef_psi)),
                d: seminorm(&(e - e * e), &rho_a)?,
                e: seminorm(&(f - f * f), &rho_b)?,
                vector_budget: root,
                operator_budget: 2.0 * root,
            });
        }
    }
    Ok(out)
}

/// All words of length `1..=degree` in `letters`, with their lengths.
fn monomials(letters: &[ComplexMatrix], degree: usize) -> Vec<(usize, ComplexMatrix)> {
    let mut all: Vec<(usize, ComplexMatrix)> = Vec::new();
    let mut layer: Vec<ComplexMatrix> = letters.to_vec();
    for len in 1..=degree {
        if len > 1 {
            layer = layer.iter().flat_map(|w| letters.iter().map(move |l| w * l)).collect();
        }
        all.extend(layer.iter().cloned().map(|w| (len, w)));
    }
    all
}

fn monomial_count(n: usize, degree: usize) -> Option<usize> {
    let mut total: usize = 0;
    let mut layer: usize = 1;
    for _ in 0..degree {
        layer = layer.checked_mul(n)?;
        total = total.checked_add(layer)?;
    }
    Some(total)
}

fn check_degree(n: usize, degree: usize) -> Result<usize> {
    if degree == 0 {
        return Err(Error::InvalidInput("monomial degree must be at least 1".into()));
    }
    let count = monomial_count(n, degree);
    match count.and_then(|c| c.checked_mul(c)) {
        Some(pairs) if pairs <= MAX_MONOMIAL_PAIRS => Ok(pairs),
        _ => Err(Error::BudgetExceeded(format!(
            "degree {degree} in {n} letters needs more than {MAX_MONOMIAL_PAIRS} monomial pairs"
        ))),
    }
}

/// Returns `(max defect, max excess over 2·min(ℓ₁,ℓ₂)·√δ)` for one party.
fn commutator_defects(letters: &[ComplexMatrix], rho: &DensityView, degree: usize, root_delta: f64) -> (f64, f64) {
    let words = monomials(letters, degree);
    let rho = rho.matrix();
    // tr(ρ(W₁W₂ − W₂W₁)) = tr((ρW₁ − W₁ρ)W₂)
    words
        .par_iter()
        .map(|(l1, w1)| {
            let comm = rho * w1 - w1 * rho;
            let mut worst = 0.0_f64;
            let mut excess = f64::NEG_INFINITY;
            for (l2, w2) in &words {
                let defect = comm.component_mul(&w2.transpose()).sum().norm();
                worst = worst.max(defect);
                excess = excess.max(defect - 2.0 * (*l1.min(l2)) as f64 * root_delta);
            }
            (worst, excess)
        })
        .reduce(|| (0.0, f64::NEG_INFINITY), |a, b| (a.0.max(b.0), a.1.max(b.1)))
}

/// `max |tr_{ρ_A}(W₁W₂ − W₂W₁)|` over monomials of degree `≤ m` in Alice's
/// outcome-1 operators.
pub fn tracial_residual(s: &Strategy, degree: usize) -> Result<f64> {
    check_degree(s.questions(), degree)?;
    Ok(commutator_defects(&s.alice_first(), &s.state.reduced_a(), degree, 0.0).0)
}

/// Traciality defects of both parties, each pair checked against its own
/// budget `2·min(ℓ₁,ℓ₂)·√δ`.
pub fn tracial_audit(s: &Strategy, degree: usize, delta: f64) -> Result<TracialReport> {
    let pairs = check_degree(s.questions(), degree)?;
    let root = delta.max(0.0).sqrt();
    let (alice, excess_a) = commutator_defects(&s.alice_first(), &s.state.reduced_a(), degree, root);
    let (bob, excess_b) = commutator_defects(&s.bob_first(), &s.state.reduced_b(), degree, root);
    let worst_excess = excess_a.max(excess_b);
    Ok(TracialReport { degree, pairs, alice, bob, worst_excess, pass: within(worst_excess, 0.0) })
}
