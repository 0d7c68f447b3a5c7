//! Seeded random matrices and vectors. All randomness flows through an
//! explicit generator; there is no global state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{c, operator_norm, ComplexMatrix, ComplexVector, vector_norm};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = c(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    m
}

pub fn random_unit_vector(dim: usize, rng: &mut Rng) -> ComplexVector {
    let v = random_matrix(dim, 1, rng).column(0).into_owned();
    let norm = vector_norm(&v);
    v.map(|z| z / norm)
}

pub fn random_real_unit_vector(dim: usize, rng: &mut Rng) -> ComplexVector {
    let v = ComplexVector::from_fn(dim, |_, _| c(gaussian(rng), 0.0));
    let norm = vector_norm(&v);
    v.map(|z| z / norm)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` folded back into `Q`.
pub fn random_unitary(d: usize, rng: &mut Rng) -> ComplexMatrix {
    let qr = random_matrix(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Hermitian matrix `(G + G*)/2` scaled to unit operator norm.
pub fn random_hermitian(d: usize, rng: &mut Rng) -> ComplexMatrix {
    let g = random_matrix(d, d, rng);
    let h = (&g + g.adjoint()) * c(0.5, 0.0);
    let norm = operator_norm(&h);
    if norm > 0.0 {
        h / c(norm, 0.0)
    } else {
        h
    }
}

/// Stable 64-bit mix of a seed with a list of indices (splitmix64 steps).
pub fn derive_seed(seed: u64, indices: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    indices.iter().fold(mix(seed), |acc, &i| mix(acc ^ mix(i)))
}
