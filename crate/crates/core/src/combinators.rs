//! Constructors that build new block-encodings from existing ones.
//!
//! Every composite keeps the global register order
//! `[selector][ancillas][system]`, most significant first. Wherever a circuit
//! interleaves registers, explicit qubit permutations from [`crate::circuits`]
//! move them back into that order, so the encoded block is always the
//! top-left corner of the returned unitary.

use crate::blockenc::BlockEncoding;
use crate::circuits::{check_cap, pauli_x, swap_block};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, ZERO};
use crate::stateprep::{verify_pair, StatePreparationPair};

/// Slack allowed when checking a pair against the coefficients it claims to prepare.
const PAIR_SLACK: f64 = 1e-9;

/// `(I_b ⊗ U_A)(SWAP_{a,b} ⊗ I_n)(I_a ⊗ U_B)`, an `(αβ, a+b, αε_B + βε_A)` encoding of `AB`.
pub fn product(be_a: &BlockEncoding, be_b: &BlockEncoding) -> Result<BlockEncoding> {
    if be_a.n() != be_b.n() {
        return Err(Error::dims("product", be_a.n(), be_b.n()));
    }
    let (a, b, n) = (be_a.a(), be_b.a(), be_a.n());
    check_cap(a + b + n)?;
    let right = CMatrix::identity(1 << a).kron(be_b.unitary());
    let swap = swap_block(a, b, a + b)?.kron(&CMatrix::identity(1 << n));
    let left = CMatrix::identity(1 << b).kron(be_a.unitary());
    let u = CMatrix::mul_chain(&[&left, &swap, &right])?;
    let (alpha, beta) = (be_a.alpha(), be_b.alpha());
    BlockEncoding::from_parts(
        u,
        n,
        a + b,
        alpha * beta,
        alpha * be_b.epsilon() + beta * be_a.epsilon(),
    )
}

/// Encoding of `A ⊗ B` with contract `(αβ, a+b, αε_B + βε_A)`.
pub fn tensor(be_a: &BlockEncoding, be_b: &BlockEncoding) -> Result<BlockEncoding> {
    let (a, n) = (be_a.a(), be_a.n());
    let (b, m) = (be_b.a(), be_b.n());
    check_cap(a + b + n + m)?;
    let inner = be_a.unitary().kron(be_b.unitary());
    // [a][b][n][m] -> [a][n][b][m]
    let to_inner = interleave(a, b, n, m)?;
    let u = CMatrix::mul_chain(&[&to_inner.adjoint(), &inner, &to_inner])?;
    let (alpha, beta) = (be_a.alpha(), be_b.alpha());
    BlockEncoding::from_parts(
        u,
        n + m,
        a + b,
        alpha * beta,
        alpha * be_b.epsilon() + beta * be_a.epsilon(),
    )
}

/// `I_a ⊗ SWAP_{b,n} ⊗ I_m`, taking `[a][b][n][m]` to `[a][n][b][m]`.
fn interleave(a: usize, b: usize, n: usize, m: usize) -> Result<CMatrix> {
    Ok(CMatrix::identity(1 << a)
        .kron(&swap_block(b, n, b + n)?)
        .kron(&CMatrix::identity(1 << m)))
}

fn check_pair(pair: &StatePreparationPair, coefficients: &CVector) -> Result<()> {
    if pair.t() != coefficients.dim() {
        return Err(Error::dims(
            "state-preparation pair",
            format!("{} active coefficients", coefficients.dim()),
            pair.t(),
        ));
    }
    let measured = verify_pair(pair, coefficients)?;
    if measured > pair.delta() + PAIR_SLACK {
        return Err(Error::PairMismatch {
            measured,
            claimed: pair.delta(),
        });
    }
    Ok(())
}

/// `(P_L† ⊗ I) W (P_R ⊗ I)` around a selector-controlled block diagonal `W`.
fn lcu_sandwich(pair: &StatePreparationPair, w: &CMatrix) -> Result<CMatrix> {
    let inner = CMatrix::identity(w.rows() >> pair.m());
    let left = pair.v_l().adjoint().kron(&inner);
    let right = pair.v_r().kron(&inner);
    CMatrix::mul_chain(&[&left, w, &right])
}

/// Pads `u` with `extra` idle qubits in front.
fn pad(u: &CMatrix, extra: usize) -> CMatrix {
    if extra == 0 {
        u.clone()
    } else {
        CMatrix::identity(1 << extra).kron(u)
    }
}

/// Encoding of `Σ_j y_j A_j` from a pair for `(y_0α_0, y_1α_1, …)`.
///
/// The selector has `pair.m()` qubits; slots past the last term hold the
/// identity and are never reached because the pair vanishes there. The
/// claimed error is `Σ_j |y_j|ε_j` plus the pair's own `δ`.
pub fn linear_combination(
    bes: &[BlockEncoding],
    y: &CVector,
    pair: &StatePreparationPair,
) -> Result<BlockEncoding> {
    let first = bes
        .first()
        .ok_or_else(|| Error::InvalidParameter("linear combination of no terms".into()))?;
    if y.dim() != bes.len() {
        return Err(Error::dims("linear_combination", bes.len(), y.dim()));
    }
    let n = first.n();
    if let Some(bad) = bes.iter().find(|be| be.n() != n) {
        return Err(Error::dims("linear_combination", n, bad.n()));
    }
    let coefficients = CVector(
        bes.iter()
            .zip(&y.0)
            .map(|(be, &yj)| yj * be.alpha())
            .collect(),
    );
    check_pair(pair, &coefficients)?;

    let a_max = bes.iter().map(BlockEncoding::a).max().unwrap_or(0);
    let m = pair.m();
    check_cap(m + a_max + n)?;
    let idle = CMatrix::identity(1 << (a_max + n));
    let blocks: Vec<CMatrix> = (0..1usize << m)
        .map(|j| match bes.get(j) {
            Some(be) => pad(be.unitary(), a_max - be.a()),
            None => idle.clone(),
        })
        .collect();
    let u = lcu_sandwich(pair, &CMatrix::block_diag(&blocks))?;
    let epsilon: f64 = bes
        .iter()
        .zip(&y.0)
        .map(|(be, yj)| yj.norm() * be.epsilon())
        .sum::<f64>()
        + pair.delta();
    BlockEncoding::from_parts(u, n, m + a_max, pair.mu(), epsilon)
}

/// Encoding of `Σ_j y_j (A_j ⊗ B_j)` from a pair for `(y_jα_jβ_j)`.
///
/// Each term runs as `U_{A_j} ⊗ U_{B_j}` on `[a][n_A][b][n_B]`; one register
/// exchange on each side restores `[c][a][b][n_A][n_B]`.
pub fn linear_combination_tensor(
    bes_a: &[BlockEncoding],
    bes_b: &[BlockEncoding],
    y: &CVector,
    pair: &StatePreparationPair,
) -> Result<BlockEncoding> {
    if bes_a.is_empty() || bes_a.len() != bes_b.len() || y.dim() != bes_a.len() {
        return Err(Error::dims(
            "linear_combination_tensor",
            format!("{} terms on each side and as many coefficients", bes_a.len()),
            format!("{} / {} / {}", bes_a.len(), bes_b.len(), y.dim()),
        ));
    }
    let (na, nb) = (bes_a[0].n(), bes_b[0].n());
    if let Some(bad) = bes_a.iter().find(|be| be.n() != na) {
        return Err(Error::dims("linear_combination_tensor", na, bad.n()));
    }
    if let Some(bad) = bes_b.iter().find(|be| be.n() != nb) {
        return Err(Error::dims("linear_combination_tensor", nb, bad.n()));
    }
    let coefficients = CVector(
        bes_a
            .iter()
            .zip(bes_b)
            .zip(&y.0)
            .map(|((ea, eb), &yj)| yj * ea.alpha() * eb.alpha())
            .collect(),
    );
    check_pair(pair, &coefficients)?;

    let a_max = bes_a.iter().map(BlockEncoding::a).max().unwrap_or(0);
    let b_max = bes_b.iter().map(BlockEncoding::a).max().unwrap_or(0);
    let c = pair.m();
    check_cap(c + a_max + b_max + na + nb)?;
    let idle = CMatrix::identity(1 << (a_max + b_max + na + nb));
    let blocks: Vec<CMatrix> = (0..1usize << c)
        .map(|j| match (bes_a.get(j), bes_b.get(j)) {
            (Some(ea), Some(eb)) => {
                pad(ea.unitary(), a_max - ea.a()).kron(&pad(eb.unitary(), b_max - eb.a()))
            }
            _ => idle.clone(),
        })
        .collect();
    let w = CMatrix::block_diag(&blocks);
    let to_inner = CMatrix::identity(1 << c).kron(&interleave(a_max, b_max, na, nb)?);
    let w = CMatrix::mul_chain(&[&to_inner.adjoint(), &w, &to_inner])?;
    let u = lcu_sandwich(pair, &w)?;
    let epsilon: f64 = bes_a
        .iter()
        .zip(bes_b)
        .zip(&y.0)
        .map(|((ea, eb), yj)| yj.norm() * (ea.alpha() * eb.epsilon() + eb.alpha() * ea.epsilon()))
        .sum::<f64>()
        + pair.delta();
    BlockEncoding::from_parts(u, na + nb, c + a_max + b_max, pair.mu(), epsilon)
}

/// `(d_max, 1, 0)` encoding of `diag(d)` with one rotation pair per entry.
///
/// Entry `k` is carried by `R_z(2 arg d_k) R_y(2 arccos(|d_k|/d_max))` on the
/// ancilla, whose `⟨0|·|0⟩` element is `d_k/d_max`. Zero entries get
/// `arg 0 = 0` and a full `π` rotation.
pub fn diagonal(d: &CVector) -> Result<BlockEncoding> {
    let len = d.dim();
    let m = crate::linalg::qubits_of(len)?;
    check_cap(m + 1)?;
    let d_max = d.max_abs();
    if d_max == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut u = CMatrix::zeros(2 * len, 2 * len);
    for (k, dk) in d.0.iter().enumerate() {
        let ratio = (dk.norm() / d_max).clamp(0.0, 1.0);
        let phase = if *dk == ZERO { 0.0 } else { dk.arg() };
        let g = crate::circuits::rotation_z(2.0 * phase)
            .mul(&crate::circuits::rotation_y(2.0 * ratio.acos()))?;
        for q in 0..2 {
            for p in 0..2 {
                u[(q * len + k, p * len + k)] = g[(q, p)];
            }
        }
    }
    BlockEncoding::new(u, m, 1, d_max, 0.0)
}

/// `A ⊗ |0⟩⟨1| + A† ⊗ |1⟩⟨0|`, the Hermitian extension of a square matrix.
pub fn hermitian_extension(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            out[(2 * i, 2 * j + 1)] = a[(i, j)];
            out[(2 * i + 1, 2 * j)] = a[(j, i)].conj();
        }
    }
    out
}

/// `(U ⊗ |0⟩⟨0| + U† ⊗ |1⟩⟨1|)(I ⊗ σ_x)`, an `(α, a, 2ε)` encoding of the
/// Hermitian extension. The extension qubit becomes the least significant
/// system qubit.
pub fn extend(be: &BlockEncoding) -> Result<BlockEncoding> {
    check_cap(be.total_qubits() + 1)?;
    let u = be.unitary();
    let dim = u.rows();
    let mut ext = CMatrix::zeros(2 * dim, 2 * dim);
    for i in 0..dim {
        for j in 0..dim {
            ext[(2 * i, 2 * j + 1)] = u[(i, j)];
            ext[(2 * i + 1, 2 * j)] = u[(j, i)].conj();
        }
    }
    BlockEncoding::from_parts(ext, be.n() + 1, be.a(), be.alpha(), 2.0 * be.epsilon())
}

/// Recovers `A^{-1} = (I ⊗ ⟨1|) Ā^{-1} (I ⊗ |0⟩)` from an encoding of the
/// inverse of the Hermitian extension.
///
/// The extension qubit is moved in front of the system register, flipped, and
/// read as one more ancilla, giving a `(β, a+1, ε)` encoding.
pub fn unextend_inverse(be_ext_inv: &BlockEncoding) -> Result<BlockEncoding> {
    let n_ext = be_ext_inv.n();
    if n_ext == 0 {
        return Err(Error::InvalidParameter(
            "input must act on an extended system of at least one qubit".into(),
        ));
    }
    let (a, n) = (be_ext_inv.a(), n_ext - 1);
    // [a][e][n] -> [a][n][e]
    let move_ext = CMatrix::identity(1 << a).kron(&swap_block(1, n, n + 1)?);
    let flip = CMatrix::identity(1 << (a + n)).kron(&pauli_x());
    let u = CMatrix::mul_chain(&[&move_ext.adjoint(), &flip, be_ext_inv.unitary(), &move_ext])?;
    BlockEncoding::from_parts(u, n, a + 1, be_ext_inv.alpha(), be_ext_inv.epsilon())
}

/// The Hermitian extension's inverse, `A^{-1} ⊗ |1⟩⟨0| + (A†)^{-1} ⊗ |0⟩⟨1|`.
pub fn extension_inverse(a_inv: &CMatrix) -> CMatrix {
    let n = a_inv.rows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            out[(2 * i + 1, 2 * j)] = a_inv[(i, j)];
            out[(2 * i, 2 * j + 1)] = a_inv[(j, i)].conj();
        }
    }
    out
}

/// Identity encoding on `n` qubits, used for inert or constant terms.
pub fn identity_encoding(n: usize) -> Result<BlockEncoding> {
    check_cap(n)?;
    BlockEncoding::from_parts(CMatrix::identity(1 << n), n, 0, 1.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{pauli_z, phase_R_gates};
    use crate::linalg::{dilate_to_unitary, eig_hermitian, spectral_norm, C64};
    use crate::random::{exact_encoding, noisy_encoding, random_coefficients, random_unitary, rng};
    use crate::stateprep::build_sqrt_pair;
    use proptest::prelude::*;

    const SLACK: f64 = 1e-8;

    fn trivial(u: &CMatrix) -> BlockEncoding {
        BlockEncoding::trivial(u).unwrap()
    }

    fn lcu(bes: &[BlockEncoding], y: &CVector) -> BlockEncoding {
        let coeffs = CVector(bes.iter().zip(&y.0).map(|(be, yj)| yj * be.alpha()).collect());
        let m = crate::stateprep::index_qubits(bes.len());
        linear_combination(bes, y, &build_sqrt_pair(&coeffs, m).unwrap()).unwrap()
    }

    #[test]
    fn product_examples() {
        let id = CMatrix::identity(2);
        let p = product(&trivial(&id), &trivial(&id)).unwrap();
        assert_eq!(p.contract(), (1.0, 0, 0.0));
        assert_eq!(p.verify(&id).unwrap(), 0.0);

        let x2 = trivial(&pauli_x()).rescale(2.0).unwrap();
        let p = product(&x2, &trivial(&pauli_z())).unwrap();
        assert_eq!(p.alpha(), 2.0);
        let target = pauli_x().mul(&pauli_z()).unwrap().scale_real(2.0);
        assert!(p.verify(&target).unwrap() <= 1e-10);
    }

    #[test]
    fn product_of_dilations() {
        let mut r = rng(51);
        let (ea, a) = noisy_encoding(&mut r, 1, 1, 1.0);
        let (eb, b) = noisy_encoding(&mut r, 1, 2, 1.5);
        let p = product(&ea, &eb).unwrap();
        assert_eq!(p.epsilon(), ea.alpha() * eb.epsilon() + eb.alpha() * ea.epsilon());
        assert!(p.verify(&a.mul(&b).unwrap()).unwrap() <= p.epsilon() + SLACK);
        assert!(p.unitary().is_unitary(1e-9));
        assert!(product(&ea, &trivial(&CMatrix::identity(4))).is_err());
    }

    #[test]
    fn tensor_examples() {
        let t = tensor(&trivial(&pauli_x()), &trivial(&pauli_z())).unwrap();
        assert_eq!(t.verify(&pauli_x().kron(&pauli_z())).unwrap(), 0.0);

        let mut r = rng(52);
        let (ea, a) = exact_encoding(&mut r, 1, 2, 1.0);
        let t = tensor(&ea, &trivial(&CMatrix::identity(4))).unwrap();
        assert_eq!(t.contract(), ea.contract());
        assert!(t.verify(&a.kron(&CMatrix::identity(4))).unwrap() <= 1e-12);

        let (ea, a) = noisy_encoding(&mut r, 1, 1, 1.0);
        let (eb, b) = noisy_encoding(&mut r, 2, 2, 1.0);
        let t = tensor(&ea, &eb).unwrap();
        assert!(t.verify(&a.kron(&b)).unwrap() <= t.epsilon() + SLACK);
    }

    #[test]
    fn linear_combination_examples() {
        let x = trivial(&pauli_x());
        let single = lcu(std::slice::from_ref(&x), &CVector::from_real(&[1.0]));
        assert!(single.verify(&pauli_x()).unwrap() <= 1e-12);

        let id = trivial(&CMatrix::identity(2));
        let half = lcu(&[id.clone(), x], &CVector::from_real(&[0.5, 0.5]));
        assert!((half.alpha() - 1.0).abs() < 1e-15);
        let target = CMatrix::identity(2).add(&pauli_x()).unwrap().scale_real(0.5);
        assert!(half.verify(&target).unwrap() <= 1e-10);

        let diff = lcu(&[trivial(&pauli_z()), id], &CVector::from_real(&[1.0, -1.0]));
        assert!((diff.alpha() - 2.0).abs() < 1e-15);
        let target = pauli_z().sub(&CMatrix::identity(2)).unwrap();
        assert!(diff.verify(&target).unwrap() <= 1e-10);
    }

    #[test]
    fn linear_combination_rejects_foreign_pair() {
        let bes = [trivial(&pauli_x()), trivial(&pauli_z())];
        let pair = build_sqrt_pair(&CVector::from_real(&[1.0, 2.0]), 1).unwrap();
        assert!(matches!(
            linear_combination(&bes, &CVector::from_real(&[1.0, 1.0]), &pair),
            Err(Error::PairMismatch { .. })
        ));
        let pair = build_sqrt_pair(&CVector::from_real(&[1.0, 1.0, 1.0]), 2).unwrap();
        assert!(linear_combination(&bes, &CVector::from_real(&[1.0, 1.0]), &pair).is_err());
    }

    #[test]
    fn padding_terms_are_inert() {
        let mut r = rng(53);
        let (e0, a0) = noisy_encoding(&mut r, 1, 1, 1.0);
        let (e1, a1) = noisy_encoding(&mut r, 1, 2, 1.0);
        let (e2, a2) = noisy_encoding(&mut r, 1, 0, 1.0);
        let y = random_coefficients(&mut r, 3);
        let bes = [e0, e1, e2];
        let be = lcu(&bes, &y);
        let target = [a0, a1, a2]
            .iter()
            .zip(&y.0)
            .fold(CMatrix::zeros(2, 2), |acc, (a, yj)| acc.add(&a.scale(*yj)).unwrap());
        assert!(be.verify(&target).unwrap() <= be.epsilon() + SLACK);

        // swap the idle slot for a random unitary: the block must not move
        let coeffs = CVector(bes.iter().zip(&y.0).map(|(b, yj)| yj * b.alpha()).collect());
        let pair = build_sqrt_pair(&coeffs, 2).unwrap();
        let mut blocks: Vec<CMatrix> = bes.iter().map(|b| pad(b.unitary(), 2 - b.a())).collect();
        blocks.push(random_unitary(&mut r, blocks[0].rows()));
        let alt = lcu_sandwich(&pair, &CMatrix::block_diag(&blocks))
            .unwrap()
            .sub_block(0, 0, 2, 2)
            .scale_real(pair.mu());
        assert!(alt.max_abs_diff(&be.encoded_block()).unwrap() <= 1e-12);
    }

    #[test]
    fn linear_combination_tensor_examples() {
        let one = CVector::from_real(&[1.0]);
        let pair = build_sqrt_pair(&one, 1).unwrap();
        let be = linear_combination_tensor(
            &[trivial(&pauli_x())],
            &[trivial(&pauli_z())],
            &one,
            &pair,
        )
        .unwrap();
        assert!(be.verify(&pauli_x().kron(&pauli_z())).unwrap() <= 1e-12);

        // z0 I + r R ⊗ I − I ⊗ A for a one-qubit A and m = 1
        let mut r = rng(54);
        let (ea, a) = exact_encoding(&mut r, 1, 1, 1.0);
        let (z0, rad) = (0.3, 0.8);
        let id_m = trivial(&CMatrix::identity(2));
        let id_n = trivial(&CMatrix::identity(2));
        let phase = trivial(&phase_R_gates(1).unwrap());
        let y = CVector::from_real(&[z0, rad, -1.0]);
        let pair = build_sqrt_pair(&CVector::from_real(&[z0, rad, -ea.alpha()]), 2).unwrap();
        let be = linear_combination_tensor(
            &[id_m.clone(), phase, id_m],
            &[id_n.clone(), id_n, ea],
            &y,
            &pair,
        )
        .unwrap();
        let mut dense = CMatrix::zeros(4, 4);
        for k in 0..2 {
            let zk = C64::new(z0, 0.0) + C64::from_polar(rad, std::f64::consts::PI * k as f64);
            let block = CMatrix::identity(2).scale(zk).sub(&a).unwrap();
            dense.set_block(2 * k, 2 * k, &block);
        }
        assert!(be.verify(&dense).unwrap() <= 1e-10);
    }

    #[test]
    fn linear_combination_tensor_random() {
        let mut r = rng(55);
        let (a0, ta0) = noisy_encoding(&mut r, 1, 1, 1.0);
        let (a1, ta1) = noisy_encoding(&mut r, 1, 2, 1.2);
        let (b0, tb0) = noisy_encoding(&mut r, 1, 1, 0.7);
        let (b1, tb1) = noisy_encoding(&mut r, 1, 0, 1.0);
        let y = random_coefficients(&mut r, 2);
        let coeffs = CVector(vec![
            y[0] * a0.alpha() * b0.alpha(),
            y[1] * a1.alpha() * b1.alpha(),
        ]);
        let pair = build_sqrt_pair(&coeffs, 1).unwrap();
        let be = linear_combination_tensor(&[a0, a1], &[b0, b1], &y, &pair).unwrap();
        let target = ta0
            .kron(&tb0)
            .scale(y[0])
            .add(&ta1.kron(&tb1).scale(y[1]))
            .unwrap();
        assert!(be.verify(&target).unwrap() <= be.epsilon() + SLACK);
    }

    #[test]
    fn diagonal_examples() {
        let be = diagonal(&CVector::from_real(&[1.0, 1.0])).unwrap();
        assert!(be.verify(&CMatrix::identity(2)).unwrap() <= 1e-15);
        let be = diagonal(&CVector::from_real(&[1.0, -1.0])).unwrap();
        assert_eq!(be.alpha(), 1.0);
        assert!(be.verify(&pauli_z()).unwrap() <= 1e-15);
        let d = CVector(vec![C64::new(0.0, 1.0), C64::new(2.0, 0.0)]);
        let be = diagonal(&d).unwrap();
        assert_eq!(be.contract(), (2.0, 1, 0.0));
        assert!(be.verify(&CMatrix::diag(&d.0)).unwrap() <= 1e-12);
        let be = diagonal(&CVector::from_real(&[0.0, 0.5, -0.25, 0.0])).unwrap();
        assert!(be.verify(&CMatrix::diag(&CVector::from_real(&[0.0, 0.5, -0.25, 0.0]).0)).unwrap() <= 1e-12);
        assert!(matches!(diagonal(&CVector::zeros(2)), Err(Error::ZeroVector)));
        assert!(diagonal(&CVector::from_real(&[1.0; 3])).is_err());
    }

    #[test]
    fn extend_examples() {
        let be = extend(&trivial(&pauli_x())).unwrap();
        let block = be.encoded_block();
        assert!(block.is_hermitian(1e-12));
        let eig = eig_hermitian(&block).unwrap();
        for (l, want) in eig.values.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((l - want).abs() < 1e-12);
        }

        let nilpotent = CMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let ext = hermitian_extension(&nilpotent);
        assert!((spectral_norm(&ext) - spectral_norm(&nilpotent)).abs() < 1e-12);

        let (be, a) = noisy_encoding(&mut rng(56), 1, 1, 1.0);
        let e = extend(&be).unwrap();
        assert_eq!(e.contract(), (be.alpha(), be.a(), 2.0 * be.epsilon()));
        assert!(e.verify(&hermitian_extension(&a)).unwrap() <= e.epsilon() + SLACK);
        assert!(e.unitary().is_unitary(1e-9));
    }

    fn inverse_round_trip(a: &CMatrix) -> (BlockEncoding, CMatrix) {
        let a_inv = a.inverse().unwrap();
        let beta = spectral_norm(&a_inv);
        let ext_inv = extension_inverse(&a_inv).scale_real(1.0 / beta);
        let u = dilate_to_unitary(&ext_inv).unwrap();
        let n = crate::linalg::qubits_of(a.rows()).unwrap();
        let be = BlockEncoding::new(u, n + 1, 1, beta, 0.0).unwrap();
        (unextend_inverse(&be).unwrap(), a_inv)
    }

    #[test]
    fn unextend_examples() {
        let (be, _) = inverse_round_trip(&CMatrix::identity(2));
        assert!(be.verify(&CMatrix::identity(2)).unwrap() <= 1e-12);
        assert_eq!(be.a(), 2);

        let (be, a_inv) = inverse_round_trip(&CMatrix::from_real(&[&[1.0, 0.0], &[0.0, 2.0]]));
        assert!(a_inv.max_abs_diff(&CMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.5]])).unwrap() < 1e-15);
        assert!(be.verify(&a_inv).unwrap() <= be.epsilon() + SLACK);

        let mut r = rng(57);
        let a = crate::random::random_matrix(&mut r, 4, 4);
        let (be, a_inv) = inverse_round_trip(&a);
        assert!(be.verify(&a_inv).unwrap() <= 1e-9 * be.alpha());
        assert!(be.unitary().is_unitary(1e-9));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn product_and_tensor_meet_claims(seed in 0u64..10_000, aa in 0usize..=2, ab in 0usize..=2) {
            let mut r = rng(seed);
            let (ea, a) = noisy_encoding(&mut r, 1, aa, 1.0 + seed as f64 % 3.0);
            let (eb, b) = noisy_encoding(&mut r, 1, ab, 1.0);
            let p = product(&ea, &eb).unwrap();
            prop_assert!(p.verify(&a.mul(&b).unwrap()).unwrap() <= p.epsilon() + SLACK);
            let t = tensor(&ea, &eb).unwrap();
            prop_assert!(t.verify(&a.kron(&b)).unwrap() <= t.epsilon() + SLACK);
        }

        #[test]
        fn extension_spectrum_is_symmetric(seed in 0u64..10_000) {
            let (be, _) = exact_encoding(&mut rng(seed), 1, 1, 1.0);
            let block = extend(&be).unwrap().encoded_block();
            let eig = eig_hermitian(&block).unwrap();
            let k = eig.values.len();
            for i in 0..k {
                prop_assert!((eig.values[i] + eig.values[k - 1 - i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn identity_encoding_is_exact() {
        assert_eq!(identity_encoding(1).unwrap().encoded_block(), CMatrix::identity(2));
    }
}
