//! Seeded random instances for property tests and the `verify` command.
//!
//! Every generator takes an explicit RNG; [`rng_for`] derives an independent
//! ChaCha stream per `(seed, suite, trial)` so trials can run in any order
//! (or in parallel) and still produce identical instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::blockenc::BlockEncoding;
use crate::linalg::{dilate_to_unitary, spectral_norm, CMatrix, CVector, C64};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for one trial of one suite.
pub fn rng_for(seed: u64, suite: &str, trial: u64) -> TestRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    for (i, b) in suite.bytes().enumerate() {
        key[16 + i % 16] ^= b.rotate_left((i / 16) as u32);
    }
    ChaCha8Rng::from_seed(key)
}

pub fn gaussian(rng: &mut TestRng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix(rng: &mut TestRng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian(rng: &mut TestRng, dim: usize) -> CMatrix {
    let g = random_matrix(rng, dim, dim);
    g.add(&g.adjoint()).expect("square").scale_real(0.5)
}

/// Normalized random state.
pub fn random_state(rng: &mut TestRng, dim: usize) -> CVector {
    let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    CVector(v.into_iter().map(|z| z / n).collect())
}

/// Haar-like unitary from Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary(rng: &mut TestRng, dim: usize) -> CMatrix {
    let g = random_matrix(rng, dim, dim);
    let mut cols: Vec<Vec<C64>> = (0..dim).map(|j| g.column(j).0).collect();
    for j in 0..dim {
        // two passes keep the basis orthonormal to machine precision
        for _ in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let (ck, cj) = (&done[k], &mut rest[0]);
                let proj: C64 = ck.iter().zip(cj.iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in cj.iter_mut().zip(ck) {
                    *x -= proj * a;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    CMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Random matrix rescaled to spectral norm `norm`.
pub fn random_with_norm(rng: &mut TestRng, dim: usize, norm: f64) -> CMatrix {
    let g = random_matrix(rng, dim, dim);
    let s = spectral_norm(&g);
    if s == 0.0 {
        return CMatrix::zeros(dim, dim);
    }
    g.scale_real(norm / s)
}

/// Hermitian matrix `V diag(λ) V†` with a random unitary `V`.
pub fn hermitian_with_spectrum(rng: &mut TestRng, eigenvalues: &[f64]) -> CMatrix {
    let v = random_unitary(rng, eigenvalues.len());
    let d = CMatrix::diag(&eigenvalues.iter().map(|&l| C64::new(l, 0.0)).collect::<Vec<_>>());
    v.mul(&d).and_then(|vd| vd.mul(&v.adjoint())).expect("square factors")
}

/// A deliberately imperfect block-encoding and the matrix it claims to encode.
///
/// The target `A` has `‖A‖ ≤ 0.9α`. The unitary is the dilation of
/// `(A + E)/α` with a random error `E`, `‖E‖ ≤ 0.05α`, and the claimed `ε`
/// is `‖E‖`. With `a = 0` the encoding is a scaled random unitary and exact.
pub fn noisy_encoding(
    rng: &mut TestRng,
    n: usize,
    a: usize,
    alpha: f64,
) -> (BlockEncoding, CMatrix) {
    let dim = 1usize << n;
    if a == 0 {
        let u = random_unitary(rng, dim);
        let be = BlockEncoding::trivial(&u)
            .and_then(|be| be.rescale(alpha))
            .expect("random unitary is unitary");
        return (be, u.scale_real(alpha));
    }
    let target_norm = alpha * rng.gen_range(0.1..0.9);
    let target = random_with_norm(rng, dim, target_norm);
    let noise_norm = alpha * rng.gen_range(0.0..0.05);
    let noise = random_with_norm(rng, dim, noise_norm);
    let eps = spectral_norm(&noise);
    let b = target.add(&noise).expect("same shape").scale_real(1.0 / alpha);
    let u = dilate_to_unitary(&b).expect("norm at most 0.95");
    let be = BlockEncoding::new(u, n, 1, alpha, eps)
        .and_then(|be| be.embed(a - 1))
        .expect("dilation is unitary");
    (be, target)
}

/// Exact encoding of a random contraction, `(α, a, 0)` with `a ≥ 1`.
pub fn exact_encoding(rng: &mut TestRng, n: usize, a: usize, alpha: f64) -> (BlockEncoding, CMatrix) {
    let dim = 1usize << n;
    let norm = alpha * rng.gen_range(0.1..1.0);
    let target = random_with_norm(rng, dim, norm);
    let u = dilate_to_unitary(&target.scale_real(1.0 / alpha)).expect("contraction");
    let be = BlockEncoding::new(u, n, 1, alpha, 0.0)
        .and_then(|be| be.embed(a.max(1) - 1))
        .expect("dilation is unitary");
    (be, target)
}

/// Nonzero complex vector with at least one entry of modulus ≥ 0.1.
pub fn random_coefficients(rng: &mut TestRng, len: usize) -> CVector {
    loop {
        let v: Vec<C64> = (0..len).map(|_| gaussian(rng)).collect();
        if v.iter().any(|z| z.norm() >= 0.1) {
            return CVector(v);
        }
    }
}
