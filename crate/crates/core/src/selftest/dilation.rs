use serde::{Deserialize, Serialize};

use super::intertwiner::fit_against;
use super::spectral::n_operator;
use super::ALPHA_MIN;
use crate::error::{Error, Result};
use crate::families::ProjectionFamily;
use crate::matcore::json::{self, ComplexJson, MatrixJson};
use crate::matcore::{
    identity, kron, maximally_entangled, swap_middle, vector_norm, BipartiteVector, ComplexMatrix, ComplexVector,
};
use crate::strategies::{
    canonical_strategy, correlation_distance, ideal_correlation, induced_correlation, SchmidtReduction, Strategy,
};

/// Intermediate quantities of the robustness argument, all measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificateResiduals {
    /// `max_v ‖E_v − V_A*(P̃_v ⊗ I)V_A‖_{ρ_A}`
    pub compression_a: f64,
    /// `max_v ‖F_v − V_B*(P̃_vᵀ ⊗ I)V_B‖_{ρ_B}`
    pub compression_b: f64,
    /// `ε′ = max(compression_a, compression_b, δ)`
    pub epsilon_prime: f64,
    /// `‖p − p̃_{n,x}‖₁`
    pub delta: f64,
    /// `‖(V_A⊗V_B)ψ − φ_d ⊗ ψ_junk‖` (after reordering factors).
    pub state_residual: f64,
    /// Largest of the `4n²` measurement-term residuals.
    pub max_term_residual: f64,
    /// `ε′ < (x − λ₂)/(2n+1)`
    pub premises_hold: bool,
    /// `√(1 − (2n+1)ε′/(x − λ₂))`, when the premises hold.
    pub alpha_lower_bound: Option<f64>,
    /// `2ε′ + β + √(5ε′ + 4√ε′ + 2β)`, when the premises hold.
    pub epsilon_bound: Option<f64>,
}

/// Local isometries and a junk state exhibiting a reference strategy as a
/// local ε-dilation of a measured one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CertificateJson", into = "CertificateJson")]
pub struct DilationCertificate {
    /// Max over the state residual and every measurement-term residual.
    pub epsilon: f64,
    /// `‖Q(V_A⊗V_B)ψ‖` for certificates from [`extract_dilation`].
    pub alpha: Option<f64>,
    /// `√(2(2n+1)ε′/(x − λ₂))`
    pub beta: Option<f64>,
    /// `x − λ₂` of `Ñ`.
    pub gap: Option<f64>,
    /// `V_A: H_A → H̃_A ⊗ K_A`
    pub va: ComplexMatrix,
    pub vb: ComplexMatrix,
    /// State on `K_A ⊗ K_B`.
    pub junk: BipartiteVector,
    pub residuals: Option<CertificateResiduals>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CertificateJson {
    epsilon: f64,
    alpha: Option<f64>,
    beta: Option<f64>,
    gap: Option<f64>,
    #[serde(rename = "VA")]
    va: MatrixJson,
    #[serde(rename = "VB")]
    vb: MatrixJson,
    junk: Vec<ComplexJson>,
    junk_dims: [usize; 2],
    residuals: Option<CertificateResiduals>,
}

impl From<DilationCertificate> for CertificateJson {
    fn from(c: DilationCertificate) -> Self {
        CertificateJson {
            epsilon: c.epsilon,
            alpha: c.alpha,
            beta: c.beta,
            gap: c.gap,
            va: json::matrix_to_json(&c.va),
            vb: json::matrix_to_json(&c.vb),
            junk: json::vector_to_json(&c.junk.amplitudes),
            junk_dims: [c.junk.dim_a, c.junk.dim_b],
            residuals: c.residuals,
        }
    }
}

impl TryFrom<CertificateJson> for DilationCertificate {
    type Error = String;

    fn try_from(j: CertificateJson) -> std::result::Result<Self, String> {
        let va = json::matrix_from_json(&j.va).map_err(|e| format!("VA: {e}"))?;
        let vb = json::matrix_from_json(&j.vb).map_err(|e| format!("VB: {e}"))?;
        let junk = BipartiteVector::new(j.junk_dims[0], j.junk_dims[1], json::vector_from_json(&j.junk))
            .map_err(|e| format!("junk: {e}"))?;
        Ok(DilationCertificate {
            epsilon: j.epsilon,
            alpha: j.alpha,
            beta: j.beta,
            gap: j.gap,
            va,
            vb,
            junk,
            residuals: j.residuals,
        })
    }
}

/// The state residual and the worst measurement-term residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DilationResiduals {
    pub state: f64,
    pub max_term: f64,
}

impl DilationResiduals {
    pub fn epsilon(&self) -> f64 {
        self.state.max(self.max_term)
    }
}

fn shape_error(msg: impl Into<String>) -> Error {
    Error::InvalidShape(msg.into())
}

/// Residuals of `(V_A⊗V_B)(E⊗F)ψ ≈ ((Ẽ⊗F̃)ψ̃) ⊗ ψ_junk` for the state and
/// every question/outcome pair, with the ancilla factors moved to the end.
pub fn dilation_residuals(
    s: &Strategy,
    reference: &Strategy,
    va: &ComplexMatrix,
    vb: &ComplexMatrix,
    junk: &BipartiteVector,
) -> Result<DilationResiduals> {
    let (ka, kb) = (junk.dim_a, junk.dim_b);
    let (ra, rb) = (reference.dim_a(), reference.dim_b());
    if va.shape() != (ra * ka, s.dim_a()) || vb.shape() != (rb * kb, s.dim_b()) {
        return Err(shape_error(format!(
            "isometries {:?}, {:?} do not map {}x{} into ({ra}·{ka})x({rb}·{kb})",
            va.shape(),
            vb.shape(),
            s.dim_a(),
            s.dim_b()
        )));
    }
    if s.questions() != reference.questions() || s.outcomes() != reference.outcomes() {
        return Err(shape_error("strategies differ in questions or outcomes"));
    }
    let dilated = |x: &ComplexMatrix, y: &ComplexMatrix| -> Result<ComplexVector> {
        Ok(swap_middle(&s.state.apply_local(&(va * x), &(vb * y))?.amplitudes, ra, ka, rb, kb))
    };
    let target = |v: &ComplexVector| BipartiteVector::product(v, &junk.amplitudes).amplitudes;

    let state = vector_norm(&(dilated(&identity(s.dim_a()), &identity(s.dim_b()))? - target(&reference.state.amplitudes)));
    let mut max_term: f64 = 0.0;
    for v in 0..s.questions() {
        for w in 0..s.questions() {
            for i in 0..s.outcomes() {
                for j in 0..s.outcomes() {
                    let lhs = dilated(&s.alice[v][i], &s.bob[w][j])?;
                    let ideal = reference.state.apply_local(&reference.alice[v][i], &reference.bob[w][j])?;
                    max_term = max_term.max(vector_norm(&(lhs - target(&ideal.amplitudes))));
                }
            }
        }
    }
    Ok(DilationResiduals { state, max_term })
}

/// Max of the `1 + n²k²` dilation residuals.
pub fn dilation_epsilon(
    s: &Strategy,
    reference: &Strategy,
    va: &ComplexMatrix,
    vb: &ComplexMatrix,
    junk: &BipartiteVector,
) -> Result<f64> {
    Ok(dilation_residuals(s, reference, va, vb, junk)?.epsilon())
}

/// Dilation certificate from `S` to the canonical strategy of `fam`.
pub fn extract_dilation(s: &Strategy, fam: &ProjectionFamily) -> Result<DilationCertificate> {
    if s.outcomes() != 2 {
        return Err(Error::UnsupportedOutcomes(s.outcomes()));
    }
    if s.questions() != fam.n {
        return Err(shape_error(format!("strategy has {} questions, family has {}", s.questions(), fam.n)));
    }
    let d = fam.d;
    let rho_a = s.state.reduced_a();
    let rho_b = s.state.reduced_b();
    let fit_a = fit_against(&s.alice_first(), &fam.projections, d, &rho_a)?;
    let fit_b = fit_against(&s.bob_first(), &fam.transposed(), d, &rho_b)?;
    let spectral = n_operator(fam)?;

    let (sa, sb) = (fit_a.s, fit_b.s);
    let dilated = swap_middle(&s.state.apply_local(&fit_a.v, &fit_b.v)?.amplitudes, d, sa, d, sb);
    // (t* ⊗ I) ψ′ with t the top eigenvector of Ñ.
    let top = &spectral.top_vector.amplitudes;
    let ancilla = sa * sb;
    let projected = ComplexVector::from_fn(ancilla, |k, _| {
        (0..d * d).map(|m| top[m].conj() * dilated[m * ancilla + k]).sum()
    });
    let alpha = vector_norm(&projected);
    if alpha <= ALPHA_MIN {
        return Err(Error::JunkExtractionFailed { alpha, min: ALPHA_MIN });
    }
    let junk = BipartiteVector::new(sa, sb, projected.map(|z| z / alpha))?;

    let reference = canonical_strategy(fam)?;
    debug_assert!(vector_norm(&(&reference.state.amplitudes - maximally_entangled(d)?.amplitudes)) < 1e-12);
    let measured = dilation_residuals(s, &reference, &fit_a.v, &fit_b.v, &junk)?;

    let delta = correlation_distance(&induced_correlation(s)?, &ideal_correlation(fam.n, &fam.x)?)?;
    let epsilon_prime = fit_a.max_residual.max(fit_b.max_residual).max(delta);
    let gap = spectral.gap;
    let spread = (2 * fam.n + 1) as f64;
    let beta = (2.0 * spread * epsilon_prime / gap).sqrt();
    let premises_hold = epsilon_prime < gap / spread;
    let (alpha_lower_bound, epsilon_bound) = if premises_hold {
        (
            Some((1.0 - spread * epsilon_prime / gap).sqrt()),
            Some(2.0 * epsilon_prime + beta + (5.0 * epsilon_prime + 4.0 * epsilon_prime.sqrt() + 2.0 * beta).sqrt()),
        )
    } else {
        (None, None)
    };
    Ok(DilationCertificate {
        epsilon: measured.epsilon(),
        alpha: Some(alpha),
        beta: Some(beta),
        gap: Some(gap),
        va: fit_a.v,
        vb: fit_b.v,
        junk,
        residuals: Some(CertificateResiduals {
            compression_a: fit_a.max_residual,
            compression_b: fit_b.max_residual,
            epsilon_prime,
            delta,
            state_residual: measured.state,
            max_term_residual: measured.max_term,
            premises_hold,
            alpha_lower_bound,
            epsilon_bound,
        }),
    })
}

/// The Schmidt-support reduction as a certificate from `original` to the
/// reduced strategy.
pub fn reduction_certificate(original: &Strategy, reduction: &SchmidtReduction) -> Result<DilationCertificate> {
    let epsilon = dilation_epsilon(original, &reduction.strategy, &reduction.va, &reduction.vb, &reduction.junk)?;
    Ok(DilationCertificate {
        epsilon,
        alpha: None,
        beta: None,
        gap: None,
        va: reduction.va.clone(),
        vb: reduction.vb.clone(),
        junk: reduction.junk.clone(),
        residuals: None,
    })
}

/// Chains `S₃ → S₂` (`cert32`) with `S₂ → S₁` (`cert21`):
/// `U = (V ⊗ I_{K₂})∘W`, junk `ψ_junk,1 ⊗ ψ_junk,2`. The composite ε is
/// measured from `source` (`S₃`) to `target` (`S₁`).
pub fn compose_dilations(
    cert32: &DilationCertificate,
    cert21: &DilationCertificate,
    source: &Strategy,
    target: &Strategy,
) -> Result<DilationCertificate> {
    let (ka2, kb2) = (cert32.junk.dim_a, cert32.junk.dim_b);
    let (ka1, kb1) = (cert21.junk.dim_a, cert21.junk.dim_b);
    if cert32.va.nrows() != cert21.va.ncols() * ka2 || cert32.vb.nrows() != cert21.vb.ncols() * kb2 {
        return Err(shape_error("middle strategy dimensions of the two certificates differ"));
    }
    // Rows of V ⊗ I_{K₂} are indexed (h₁·k₁ + a₁)·k₂ + a₂, i.e. H₁ ⊗ K₁ ⊗ K₂.
    let ua = kron(&cert21.va, &identity(ka2)) * &cert32.va;
    let ub = kron(&cert21.vb, &identity(kb2)) * &cert32.vb;
    let product = BipartiteVector::product(&cert21.junk.amplitudes, &cert32.junk.amplitudes);
    let junk = BipartiteVector::new(ka1 * ka2, kb1 * kb2, swap_middle(&product.amplitudes, ka1, kb1, ka2, kb2))?;
    let epsilon = dilation_epsilon(source, target, &ua, &ub, &junk)?;
    Ok(DilationCertificate { epsilon, alpha: None, beta: None, gap: None, va: ua, vb: ub, junk, residuals: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{four_family, simplex_family};
    use crate::matcore::isometry_defect;
    use crate::strategies::{pad_strategy, perturb, schmidt_reduce, NoiseModel};

    fn trivial_junk() -> BipartiteVector {
        BipartiteVector::new(1, 1, ComplexVector::from_element(1, crate::matcore::ONE)).unwrap()
    }

    #[test]
    fn canonical_certificate_is_exact() {
        for fam in [simplex_family(3).unwrap(), four_family(1).unwrap(), four_family(2).unwrap()] {
            let s = canonical_strategy(&fam).unwrap();
            let cert = extract_dilation(&s, &fam).unwrap();
            assert!(cert.epsilon <= 1e-8, "{}", cert.epsilon);
            assert!(cert.alpha.unwrap() >= 1.0 - 1e-10);
            assert_eq!((cert.junk.dim_a, cert.junk.dim_b), (1, 1));
            assert!(isometry_defect(&cert.va) < 1e-10 && isometry_defect(&cert.vb) < 1e-10);
            let res = cert.residuals.as_ref().unwrap();
            assert!(res.premises_hold);
        }
    }

    #[test]
    fn identity_dilation_has_zero_epsilon() {
        let fam = four_family(1).unwrap();
        let s = canonical_strategy(&fam).unwrap();
        let eps = dilation_epsilon(&s, &s, &identity(3), &identity(3), &trivial_junk()).unwrap();
        assert!(eps < 1e-12);
    }

    #[test]
    fn orthogonal_junk_gives_root_two() {
        let fam = four_family(1).unwrap();
        let s = canonical_strategy(&fam).unwrap();
        // Embed with ancilla e_0 ⊗ e_0, then claim the orthogonal junk e_1 ⊗ e_1.
        let e = |k: usize| ComplexVector::from_fn(2, |i, _| if i == k { crate::matcore::ONE } else { crate::matcore::ZERO });
        let embed = kron(&identity(3), &ComplexMatrix::from_column_slice(2, 1, e(0).as_slice()));
        let wrong = BipartiteVector::product(&e(1), &e(1));
        let res = dilation_residuals(&s, &s, &embed, &embed, &wrong).unwrap();
        assert!(res.state >= 2f64.sqrt() - 1e-6);
        let right = BipartiteVector::product(&e(0), &e(0));
        assert!(dilation_epsilon(&s, &s, &embed, &embed, &right).unwrap() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let fam = four_family(1).unwrap();
        let s = canonical_strategy(&fam).unwrap();
        assert!(matches!(
            dilation_epsilon(&s, &s, &identity(2), &identity(3), &trivial_junk()),
            Err(Error::InvalidShape(_))
        ));
    }

    #[test]
    fn far_state_fails_extraction() {
        let fam = four_family(1).unwrap();
        let mut s = canonical_strategy(&fam).unwrap();
        // A product state has overlap 1/√d... below α_min only for large d;
        // force it with a state orthogonal to φ_d.
        let mut amps = ComplexVector::zeros(9);
        amps[1] = crate::matcore::ONE;
        s.state = BipartiteVector::new(3, 3, amps).unwrap();
        match extract_dilation(&s, &fam) {
            Err(Error::JunkExtractionFailed { alpha, .. }) => assert!(alpha <= ALPHA_MIN),
            other => panic!("expected extraction failure, got {other:?}"),
        }
    }

    #[test]
    fn certificate_recomputes_and_round_trips() {
        let fam = four_family(1).unwrap();
        let s = perturb(&canonical_strategy(&fam).unwrap(), NoiseModel::PovmJitter, 1e-2, 4).unwrap();
        let cert = extract_dilation(&s, &fam).unwrap();
        let reference = canonical_strategy(&fam).unwrap();
        let again = dilation_epsilon(&s, &reference, &cert.va, &cert.vb, &cert.junk).unwrap();
        assert_eq!(again, cert.epsilon);
        let text = serde_json::to_string(&cert).unwrap();
        let back: DilationCertificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cert);
        let res = cert.residuals.unwrap();
        if res.premises_hold {
            assert!(res.state_residual <= cert.beta.unwrap() + 1e-9);
            assert!(cert.epsilon <= res.epsilon_bound.unwrap() + 1e-9);
        }
    }

    #[test]
    fn composing_with_identity_keeps_epsilon() {
        let fam = four_family(1).unwrap();
        let reference = canonical_strategy(&fam).unwrap();
        let s = perturb(&reference, NoiseModel::StateMixing, 1e-2, 2).unwrap();
        let cert = extract_dilation(&s, &fam).unwrap();
        let id = DilationCertificate {
            epsilon: 0.0,
            alpha: None,
            beta: None,
            gap: None,
            va: identity(3),
            vb: identity(3),
            junk: trivial_junk(),
            residuals: None,
        };
        let composed = compose_dilations(&cert, &id, &s, &reference).unwrap();
        assert!((composed.epsilon - cert.epsilon).abs() < 1e-12);
    }

    #[test]
    fn schmidt_chain_composes() {
        let fam = four_family(1).unwrap();
        let reference = canonical_strategy(&fam).unwrap();
        let noisy = perturb(&reference, NoiseModel::PovmJitter, 1e-3, 8).unwrap();
        let padded = pad_strategy(&noisy, 1, 2).unwrap();
        let reduction = schmidt_reduce(&padded).unwrap();
        let first = reduction_certificate(&padded, &reduction).unwrap();
        let second = extract_dilation(&reduction.strategy, &fam).unwrap();
        let composed = compose_dilations(&first, &second, &padded, &reference).unwrap();
        assert!(isometry_defect(&composed.va) < 1e-10);
        assert!(composed.epsilon <= first.epsilon + second.epsilon + 1e-10);
    }
}
