use proptest::prelude::*;

use projsum::families::{in_lambda, lambda_sequence, Rational};
use projsum::matcore::random::{random_matrix, random_unit_vector, random_unitary, seeded, Rng};
use projsum::matcore::{identity, real, swap_middle, BipartiteVector, ComplexMatrix, ComplexVector};
use projsum::selftest::{expectation_estimate, near_vectors_bound, vector_estimate};
use projsum::strategies::{induced_correlation, marginals, perturb, NoiseModel, Strategy, POVM_TOL};

/// Two-outcome POVM `{E, I − E}` with `E = U diag(λ) U*`, `λ ∈ [0, 1]`.
fn random_binary_povm(dim: usize, rng: &mut Rng) -> Vec<ComplexMatrix> {
    let u = random_unitary(dim, rng);
    let weights = random_matrix(dim, 1, rng);
    let diag = ComplexMatrix::from_fn(dim, dim, |i, j| if i == j { real(weights[(i, 0)].norm().min(1.0)) } else { real(0.0) });
    let e = &u * diag * u.adjoint();
    let e = (&e + e.adjoint()) * real(0.5);
    let rest = identity(dim) - &e;
    vec![e, rest]
}

fn random_strategy(n: usize, da: usize, db: usize, seed: u64) -> Strategy {
    let mut rng = seeded(seed);
    let state = BipartiteVector::new(da, db, random_unit_vector(da * db, &mut rng)).unwrap();
    let alice = (0..n).map(|_| random_binary_povm(da, &mut rng)).collect();
    let bob = (0..n).map(|_| random_binary_povm(db, &mut rng)).collect();
    Strategy::new(state, alice, bob).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn correlations_are_normalised_and_nonsignalling(n in 3usize..6, da in 1usize..5, db in 1usize..5, seed: u64) {
        let s = random_strategy(n, da, db, seed);
        let p = induced_correlation(&s).unwrap();
        prop_assert!(p.entries().iter().all(|&q| q >= -1e-12));
        for v in 0..n {
            for w in 0..n {
                let total: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| p.get(v, w, i, j)).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
        prop_assert!(marginals(&p).signaling_residual < 1e-12);
    }

    #[test]
    fn perturbation_is_deterministic_and_valid(level in 0.0f64..=1.0, seed: u64, model in 0usize..3) {
        let s = random_strategy(4, 3, 2, seed ^ 0x55);
        let model = NoiseModel::ALL[model];
        let a = perturb(&s, model, level, seed).unwrap();
        let b = perturb(&s, model, level, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.validate(POVM_TOL).is_ok());
        let text = serde_json::to_string(&a).unwrap();
        let back: Strategy = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn swap_middle_round_trips(da in 1usize..4, ka in 1usize..4, db in 1usize..4, kb in 1usize..4, seed: u64) {
        let v = random_unit_vector(da * ka * db * kb, &mut seeded(seed));
        let there = swap_middle(&v, da, ka, db, kb);
        let back = swap_middle(&there, da, db, ka, kb);
        prop_assert!((back - v).norm() == 0.0);
    }

    #[test]
    fn local_estimates_hold(da in 1usize..5, db in 1usize..4, log_scale in -8i32..1, seed: u64) {
        let mut rng = seeded(seed);
        let psi = BipartiteVector::new(da, db, random_unit_vector(da * db, &mut rng)).unwrap();
        let scale = real(10f64.powi(log_scale));
        let x1 = random_matrix(da, da, &mut rng);
        let x2 = &x1 + random_matrix(da, da, &mut rng) * scale;
        let y1 = random_matrix(db, db, &mut rng);
        let y2 = &y1 + random_matrix(db, db, &mut rng) * scale;
        prop_assert!(expectation_estimate(&x1, &x2, &y1, &y2, &psi).unwrap().slack() >= -1e-10);
        prop_assert!(vector_estimate(&x1, &x2, &y1, &y2, &psi).unwrap().slack() >= -1e-10);
    }

    #[test]
    fn near_vectors_hold(dim in 1usize..9, rank_seed: usize, log_scale in -8i32..1, seed: u64) {
        let mut rng = seeded(seed);
        let rank = 1 + rank_seed % dim;
        let q = random_unitary(dim, &mut rng).columns(0, rank).into_owned();
        let p = &q * q.adjoint();
        let eta: ComplexVector = random_unit_vector(dim, &mut rng);
        let xi = &p * &eta + random_unit_vector(dim, &mut rng) * real(10f64.powi(log_scale));
        prop_assert!(near_vectors_bound(&xi, &eta, &p).unwrap().slack() >= -1e-10);
    }

    #[test]
    fn lambda_membership_for_four(p in 0i64..200, q in 1i64..200) {
        let x = Rational::new(p, q).unwrap();
        // x = 4k/(2k+1) for some k ≥ 0, checked over the reduced fraction.
        let (num, den) = x.to_pair().unwrap();
        let expected = num % 4 == 0 && den == num / 2 + 1;
        prop_assert_eq!(in_lambda(4, &x).unwrap(), expected);
    }
}

#[test]
fn lambda_sequences_are_members_and_bounded() {
    for n in 4..9usize {
        let seq = lambda_sequence(n, 30).unwrap();
        let nr = Rational::from_integer(n as i64);
        for pair in seq.windows(2) {
            assert!(pair[0] < pair[1]);
        }
        for x in &seq {
            assert!(in_lambda(n, x).unwrap());
            // Strictly below the smaller root of y² − n·y + n, exactly.
            assert!(x < &(&nr / &Rational::from_integer(2)));
            assert!(&(&(x * x) - &(&nr * x)) + &nr > Rational::zero());
        }
        let between = (&seq[3] + &seq[4]) / Rational::from_integer(2);
        assert!(!in_lambda(n, &between).unwrap());
    }
}
