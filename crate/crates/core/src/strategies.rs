//! Quantum strategies, their correlations, canonical strategies and
//! seeded perturbations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{in_lambda, validate_family, ProjectionFamily, Rational, PROJ_TOL};
use crate::matcore::json;
use crate::matcore::random::{random_hermitian, random_unit_vector, seeded};
use crate::matcore::{
    c, hermitian_defect, hermitian_eig, hermitian_function, identity, inner, kron, maximally_entangled, real,
    schmidt, vec_of, vector_norm, BipartiteVector, ComplexMatrix, ComplexVector,
};

pub const POVM_TOL: f64 = 1e-8;
pub const CORR_TOL: f64 = 1e-10;

/// A bipartite state with one POVM per question for each party.
/// `alice[v][i]` is Alice's element for question `v`, outcome `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StrategyJson", into = "StrategyJson")]
pub struct Strategy {
    pub state: BipartiteVector,
    pub alice: Vec<Vec<ComplexMatrix>>,
    pub bob: Vec<Vec<ComplexMatrix>>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct StrategyJson {
    dim_a: usize,
    dim_b: usize,
    #[serde(with = "json::vector")]
    state: ComplexVector,
    #[serde(with = "json::matrix_grid")]
    alice: Vec<Vec<ComplexMatrix>>,
    #[serde(with = "json::matrix_grid")]
    bob: Vec<Vec<ComplexMatrix>>,
}

impl TryFrom<StrategyJson> for Strategy {
    type Error = Error;
    fn try_from(raw: StrategyJson) -> Result<Self> {
        let state = BipartiteVector::new(raw.dim_a, raw.dim_b, raw.state)?;
        Strategy::new(state, raw.alice, raw.bob)
    }
}

impl From<Strategy> for StrategyJson {
    fn from(s: Strategy) -> Self {
        StrategyJson {
            dim_a: s.state.dim_a,
            dim_b: s.state.dim_b,
            state: s.state.amplitudes,
            alice: s.alice,
            bob: s.bob,
        }
    }
}

fn check_povms(side: &str, povms: &[Vec<ComplexMatrix>], dim: usize, tol: f64) -> Result<()> {
    for (v, povm) in povms.iter().enumerate() {
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, e) in povm.iter().enumerate() {
            if e.shape() != (dim, dim) {
                return Err(Error::InvalidStrategy(format!(
                    "{side} element ({v},{i}) is {:?}, expected {dim}x{dim}",
                    e.shape()
                )));
            }
            if hermitian_defect(e) > tol {
                return Err(Error::InvalidStrategy(format!("{side} element ({v},{i}) is not Hermitian")));
            }
            let (vals, _) = hermitian_eig(&((e + e.adjoint()) * real(0.5)))?;
            if vals.last().copied().unwrap_or(0.0) < -tol {
                return Err(Error::InvalidStrategy(format!("{side} element ({v},{i}) is not positive")));
            }
            sum += e;
        }
        let defect = (sum - identity(dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > tol {
            return Err(Error::InvalidStrategy(format!(
                "{side} measurement {v} sums to identity only within {defect:.3e}"
            )));
        }
    }
    Ok(())
}

impl Strategy {
    pub fn new(state: BipartiteVector, alice: Vec<Vec<ComplexMatrix>>, bob: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let s = Strategy { state, alice, bob };
        s.validate(POVM_TOL)?;
        Ok(s)
    }

    pub fn validate(&self, povm_tol: f64) -> Result<()> {
        if !self.state.is_unit() {
            return Err(Error::InvalidStrategy(format!("state has norm {}", self.state.norm())));
        }
        let n = self.alice.len();
        if n == 0 || self.bob.len() != n {
            return Err(Error::InvalidStrategy(format!(
                "Alice has {n} questions and Bob has {}",
                self.bob.len()
            )));
        }
        let k = self.alice[0].len();
        if k == 0 || self.alice.iter().chain(&self.bob).any(|m| m.len() != k) {
            return Err(Error::InvalidStrategy("measurements disagree on the outcome count".into()));
        }
        check_povms("Alice", &self.alice, self.state.dim_a, povm_tol)?;
        check_povms("Bob", &self.bob, self.state.dim_b, povm_tol)
    }

    pub fn questions(&self) -> usize {
        self.alice.len()
    }

    pub fn outcomes(&self) -> usize {
        self.alice[0].len()
    }

    pub fn dim_a(&self) -> usize {
        self.state.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.state.dim_b
    }

    /// Alice's outcome-1 operators `E_v = E_{v,1}`.
    pub fn alice_first(&self) -> Vec<ComplexMatrix> {
        self.alice.iter().map(|m| m[0].clone()).collect()
    }

    pub fn bob_first(&self) -> Vec<ComplexMatrix> {
        self.bob.iter().map(|m| m[0].clone()).collect()
    }
}

/// Two-outcome PVM `{P, I − P}`.
fn binary(p: &ComplexMatrix) -> Vec<ComplexMatrix> {
    vec![p.clone(), identity(p.nrows()) - p]
}

/// State `φ_d`; Alice measures `{P̃_v, I − P̃_v}`, Bob `{P̃_vᵀ, I − P̃_vᵀ}`.
pub fn canonical_strategy(fam: &ProjectionFamily) -> Result<Strategy> {
    let report = validate_family(fam, PROJ_TOL);
    if !report.pass {
        return Err(Error::InvalidFamily(report.failures.join("; ")));
    }
    Strategy::new(
        maximally_entangled(fam.d)?,
        fam.projections.iter().map(binary).collect(),
        fam.transposed().iter().map(binary).collect(),
    )
}

/// A table `p(i,j|v,w)` with `n` questions and `k` outcomes per party.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CorrelationJson", into = "CorrelationJson")]
pub struct Correlation {
    pub n: usize,
    pub k: usize,
    table: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrelationJson {
    n: usize,
    k: usize,
    table: Vec<Vec<Vec<Vec<f64>>>>,
}

impl TryFrom<CorrelationJson> for Correlation {
    type Error = Error;
    fn try_from(raw: CorrelationJson) -> Result<Self> {
        let (n, k) = (raw.n, raw.k);
        let mut corr = Correlation::zeros(n, k);
        let bad = || Error::InvalidShape(format!("correlation table must have shape ({n},{n},{k},{k})"));
        if raw.table.len() != n {
            return Err(bad());
        }
        for (v, rows) in raw.table.iter().enumerate() {
            if rows.len() != n {
                return Err(bad());
            }
            for (w, block) in rows.iter().enumerate() {
                if block.len() != k || block.iter().any(|r| r.len() != k) {
                    return Err(bad());
                }
                for (i, r) in block.iter().enumerate() {
                    for (j, &p) in r.iter().enumerate() {
                        corr.set(v, w, i, j, p);
                    }
                }
            }
        }
        Ok(corr)
    }
}

impl From<Correlation> for CorrelationJson {
    fn from(p: Correlation) -> Self {
        let table = (0..p.n)
            .map(|v| {
                (0..p.n)
                    .map(|w| (0..p.k).map(|i| (0..p.k).map(|j| p.get(v, w, i, j)).collect()).collect())
                    .collect()
            })
            .collect();
        CorrelationJson { n: p.n, k: p.k, table }
    }
}

impl Correlation {
    pub fn zeros(n: usize, k: usize) -> Self {
        Correlation { n, k, table: vec![0.0; n * n * k * k] }
    }

    fn index(&self, v: usize, w: usize, i: usize, j: usize) -> usize {
        ((v * self.n + w) * self.k + i) * self.k + j
    }

    pub fn get(&self, v: usize, w: usize, i: usize, j: usize) -> f64 {
        self.table[self.index(v, w, i, j)]
    }

    pub fn set(&mut self, v: usize, w: usize, i: usize, j: usize, p: f64) {
        let idx = self.index(v, w, i, j);
        self.table[idx] = p;
    }

    pub fn entries(&self) -> &[f64] {
        &self.table
    }

    /// Entries are `≥ −tol` and every `(v,w)` block sums to one.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if let Some(p) = self.table.iter().find(|&&p| p < -tol || !p.is_finite()) {
            return Err(Error::InvalidInput(format!("correlation entry {p} is negative")));
        }
        for v in 0..self.n {
            for w in 0..self.n {
                let total: f64 = (0..self.k).flat_map(|i| (0..self.k).map(move |j| (i, j))).map(|(i, j)| self.get(v, w, i, j)).sum();
                if (total - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidInput(format!("block ({v},{w}) sums to {total}")));
                }
            }
        }
        Ok(())
    }
}

/// Closed-form correlation of the canonical strategy for `x ∈ Λ_n`.
pub fn ideal_correlation(n: usize, x: &Rational) -> Result<Correlation> {
    if !in_lambda(n, x)? {
        return Err(Error::UnsupportedScalar(format!("{x} for n = {n}")));
    }
    let nr = Rational::from_integer(n as i64);
    let one = Rational::one();
    let diag = x / &nr;
    let off = &(x * &(x - &one)) / &(&nr * &(&nr - &one));
    let mut p = Correlation::zeros(n, 2);
    for v in 0..n {
        for w in 0..n {
            let p11 = if v == w { diag.clone() } else { off.clone() };
            let p12 = &diag - &p11;
            let p22 = &(&one - &(&diag + &diag)) + &p11;
            p.set(v, w, 0, 0, p11.to_f64());
            p.set(v, w, 0, 1, p12.to_f64());
            p.set(v, w, 1, 0, p12.to_f64());
            p.set(v, w, 1, 1, p22.to_f64());
        }
    }
    Ok(p)
}

/// `p(i,j|v,w) = ⟨(E_{v,i} ⊗ F_{w,j})ψ, ψ⟩`.
pub fn induced_correlation(s: &Strategy) -> Result<Correlation> {
    s.validate(POVM_TOL)?;
    let (n, k) = (s.questions(), s.outcomes());
    let m = s.state.coefficient_matrix();
    let mut p = Correlation::zeros(n, k);
    // ⟨(E⊗F)vec M, vec M⟩ = tr(M* E M Fᵀ) = Σ_{b,b'} (M* E M)[b,b'] F[b,b'].
    for v in 0..n {
        for i in 0..k {
            let g = m.adjoint() * &s.alice[v][i] * &m;
            for w in 0..n {
                for j in 0..k {
                    let f = &s.bob[w][j];
                    let val: f64 = g.iter().zip(f.iter()).map(|(a, b)| (a * b).re).sum();
                    p.set(v, w, i, j, val);
                }
            }
        }
    }
    Ok(p)
}

/// Observable strategy for CHSH: `φ_2`, Alice `Z, X`, Bob `(Z ± X)/√2`,
/// each converted to the PVM `{(I + A)/2, (I − A)/2}`.
pub fn chsh_fixture() -> Strategy {
    let z = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![real(1.0), real(-1.0)]));
    let x = ComplexMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)]);
    let h = real(std::f64::consts::FRAC_1_SQRT_2);
    let pvm = |a: &ComplexMatrix| vec![(identity(2) + a) * real(0.5), (identity(2) - a) * real(0.5)];
    Strategy::new(
        maximally_entangled(2).expect("d = 2"),
        vec![pvm(&z), pvm(&x)],
        vec![pvm(&((&z + &x) * h)), pvm(&((&z - &x) * h))],
    )
    .expect("fixture is a valid strategy")
}

/// Winning probability of CHSH (`a ⊕ b = v ∧ w`) under uniform questions.
pub fn chsh_win_probability(p: &Correlation) -> Result<f64> {
    if p.n != 2 || p.k != 2 {
        return Err(Error::InvalidShape("CHSH needs a 2-question, 2-outcome table".into()));
    }
    let mut win = 0.0;
    for v in 0..2 {
        for w in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    if (a ^ b) == (v & w) {
                        win += 0.25 * p.get(v, w, a, b);
                    }
                }
            }
        }
    }
    Ok(win)
}

/// `Σ |p − q|` over all cells.
pub fn correlation_distance(p: &Correlation, q: &Correlation) -> Result<f64> {
    if (p.n, p.k) != (q.n, q.k) {
        return Err(Error::InvalidShape(format!(
            "tables of shape ({},{}) and ({},{})",
            p.n, p.k, q.n, q.k
        )));
    }
    Ok(p.table.iter().zip(&q.table).map(|(a, b)| (a - b).abs()).sum())
}

/// `max_{v, i≠j} p(i,j|v,v)`.
pub fn synchronicity_defect(p: &Correlation) -> f64 {
    let mut worst: f64 = 0.0;
    for v in 0..p.n {
        for i in 0..p.k {
            for j in 0..p.k {
                if i != j {
                    worst = worst.max(p.get(v, v, i, j));
                }
            }
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct Marginals {
    /// `p_A(i|v)`, averaged over Bob's questions.
    pub alice: Vec<Vec<f64>>,
    /// `p_B(j|w)`, averaged over Alice's questions.
    pub bob: Vec<Vec<f64>>,
    /// Largest spread of a marginal across the other party's questions.
    pub signaling_residual: f64,
}

pub fn marginals(p: &Correlation) -> Marginals {
    let (n, k) = (p.n, p.k);
    let alice_given = |v: usize, i: usize, w: usize| (0..k).map(|j| p.get(v, w, i, j)).sum::<f64>();
    let bob_given = |w: usize, j: usize, v: usize| (0..k).map(|i| p.get(v, w, i, j)).sum::<f64>();
    let mut residual: f64 = 0.0;
    let mut spread = |vals: Vec<f64>| {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        residual = residual.max(hi - lo);
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let alice: Vec<Vec<f64>> = (0..n)
        .map(|v| (0..k).map(|i| spread((0..n).map(|w| alice_given(v, i, w)).collect())).collect())
        .collect();
    let bob: Vec<Vec<f64>> = (0..n)
        .map(|w| (0..k).map(|j| spread((0..n).map(|v| bob_given(w, j, v)).collect())).collect())
        .collect();
    Marginals { alice, bob, signaling_residual: residual }
}

/// A strategy restricted to the Schmidt supports of its state, together
/// with the isometries exhibiting it as a local dilation of the original.
#[derive(Clone, Debug)]
pub struct SchmidtReduction {
    pub strategy: Strategy,
    /// `ι_A: C^r → C^{dA}`, `e_l ↦ ξ_l`.
    pub iota_a: ComplexMatrix,
    pub iota_b: ComplexMatrix,
    /// `V_A ξ = ι_A*ξ ⊗ ξ_1 + e_1 ⊗ (I − ι_A ι_A*)ξ`, into `C^r ⊗ C^{dA}`.
    pub va: ComplexMatrix,
    pub vb: ComplexMatrix,
    /// `ξ_1 ⊗ η_1` on `C^{dA} ⊗ C^{dB}`.
    pub junk: BipartiteVector,
}

fn reduction_isometry(iota: &ComplexMatrix) -> ComplexMatrix {
    let (dim, r) = iota.shape();
    let first = iota.column(0).into_owned();
    let mut e1 = ComplexMatrix::zeros(r, 1);
    e1[(0, 0)] = real(1.0);
    let support = iota * iota.adjoint();
    kron(&iota.adjoint(), &ComplexMatrix::from_column_slice(dim, 1, first.as_slice()))
        + kron(&e1, &(identity(dim) - support))
}

pub fn schmidt_reduce(s: &Strategy) -> Result<SchmidtReduction> {
    s.validate(POVM_TOL)?;
    let decomposition = schmidt(&s.state)?;
    let r = decomposition.rank();
    let columns = |vs: &[ComplexVector]| {
        ComplexMatrix::from_fn(vs[0].len(), r, |row, l| vs[l][row])
    };
    let iota_a = columns(&decomposition.left_vectors);
    let iota_b = columns(&decomposition.right_vectors);
    let amplitudes = ComplexVector::from_fn(r * r, |idx, _| {
        if idx / r == idx % r {
            real(decomposition.coefficients[idx / r])
        } else {
            c(0.0, 0.0)
        }
    });
    let compress = |iota: &ComplexMatrix, povms: &[Vec<ComplexMatrix>]| -> Vec<Vec<ComplexMatrix>> {
        povms
            .iter()
            .map(|m| {
                m.iter()
                    .map(|e| {
                        let ep = iota.adjoint() * e * iota;
                        (&ep + ep.adjoint()) * real(0.5)
                    })
                    .collect()
            })
            .collect()
    };
    let strategy = Strategy::new(
        BipartiteVector::new(r, r, amplitudes)?,
        compress(&iota_a, &s.alice),
        compress(&iota_b, &s.bob),
    )?;
    let junk = BipartiteVector::product(&decomposition.left_vectors[0], &decomposition.right_vectors[0]);
    Ok(SchmidtReduction {
        va: reduction_isometry(&iota_a),
        vb: reduction_isometry(&iota_b),
        strategy,
        iota_a,
        iota_b,
        junk,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    /// Rotate the state toward a seeded random orthogonal direction by angle `level`.
    StateMixing,
    /// Conjugate each POVM element by `exp(i·level·H)`, then renormalise.
    PovmJitter,
    /// Mix each POVM with the uniform POVM at weight `level`.
    OutcomeNoise,
}

impl NoiseModel {
    pub const ALL: [NoiseModel; 3] = [NoiseModel::StateMixing, NoiseModel::PovmJitter, NoiseModel::OutcomeNoise];

    pub fn name(self) -> &'static str {
        match self {
            NoiseModel::StateMixing => "state-mixing",
            NoiseModel::PovmJitter => "povm-jitter",
            NoiseModel::OutcomeNoise => "outcome-noise",
        }
    }
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        NoiseModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown noise model {s:?}")))
    }
}

fn jitter(povms: &[Vec<ComplexMatrix>], level: f64, rng: &mut crate::matcore::random::Rng) -> Result<Vec<Vec<ComplexMatrix>>> {
    povms
        .iter()
        .map(|m| {
            let dim = m[0].nrows();
            let rotated: Vec<ComplexMatrix> = m
                .iter()
                .map(|e| {
                    let h = random_hermitian(dim, rng);
                    let u = hermitian_function(&h, |l| c(0.0, level * l).exp())?;
                    Ok(&u * e * u.adjoint())
                })
                .collect::<Result<_>>()?;
            let total: ComplexMatrix = rotated.iter().sum();
            let inv_sqrt = hermitian_function(&((&total + total.adjoint()) * real(0.5)), |l| real(1.0 / l.sqrt()))?;
            Ok(rotated
                .iter()
                .map(|e| {
                    let out = &inv_sqrt * e * &inv_sqrt;
                    (&out + out.adjoint()) * real(0.5)
                })
                .collect())
        })
        .collect()
}

/// Deterministic perturbation of `s` by `model` at `level ∈ [0, 1]`.
pub fn perturb(s: &Strategy, model: NoiseModel, level: f64, seed: u64) -> Result<Strategy> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::InvalidLevel(level));
    }
    if level == 0.0 {
        return Ok(s.clone());
    }
    let mut rng = seeded(seed);
    let mut out = s.clone();
    match model {
        NoiseModel::StateMixing => {
            let psi = &s.state.amplitudes;
            let g = random_unit_vector(psi.len(), &mut rng);
            let orth = &g - psi * inner(&g, psi);
            let orth = &orth / real(vector_norm(&orth));
            let mut mixed = psi * real(level.cos()) + orth * real(level.sin());
            let norm = vector_norm(&mixed);
            mixed /= real(norm);
            out.state = BipartiteVector::new(s.dim_a(), s.dim_b(), mixed)?;
        }
        NoiseModel::PovmJitter => {
            out.alice = jitter(&s.alice, level, &mut rng)?;
            out.bob = jitter(&s.bob, level, &mut rng)?;
        }
        NoiseModel::OutcomeNoise => {
            let mix = |povms: &[Vec<ComplexMatrix>]| -> Vec<Vec<ComplexMatrix>> {
                povms
                    .iter()
                    .map(|m| {
                        let uniform = identity(m[0].nrows()) * real(1.0 / m.len() as f64);
                        m.iter().map(|e| e * real(1.0 - level) + &uniform * real(level)).collect()
                    })
                    .collect()
            };
            out.alice = mix(&s.alice);
            out.bob = mix(&s.bob);
        }
    }
    out.validate(POVM_TOL)?;
    Ok(out)
}

/// Embeds a strategy into larger local spaces by zero-padding each operator
/// (`I` on the padding for the last outcome) and the state.
pub fn pad_strategy(s: &Strategy, extra_a: usize, extra_b: usize) -> Result<Strategy> {
    let (da, db) = (s.dim_a(), s.dim_b());
    let (na, nb) = (da + extra_a, db + extra_b);
    let m = s.state.coefficient_matrix();
    let mut big = ComplexMatrix::zeros(na, nb);
    big.view_mut((0, 0), (da, db)).copy_from(&m);
    let pad = |povms: &[Vec<ComplexMatrix>], dim: usize, total: usize| -> Vec<Vec<ComplexMatrix>> {
        povms
            .iter()
            .map(|povm| {
                povm.iter()
                    .enumerate()
                    .map(|(i, e)| {
                        let mut out = ComplexMatrix::zeros(total, total);
                        out.view_mut((0, 0), (dim, dim)).copy_from(e);
                        if i + 1 == povm.len() {
                            for t in dim..total {
                                out[(t, t)] = real(1.0);
                            }
                        }
                        out
                    })
                    .collect()
            })
            .collect()
    };
    Strategy::new(vec_of(&big), pad(&s.alice, da, na), pad(&s.bob, db, nb))
}
