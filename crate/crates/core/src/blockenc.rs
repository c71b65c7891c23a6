//! Block-encodings: a unitary together with its `(α, a, ε)` contract.
//!
//! The ancilla register is the most significant one, so projecting onto
//! `|0^a⟩` keeps the first `2^n` rows and columns of the unitary.

use log::warn;

use crate::circuits::check_cap;
use crate::error::{Error, Result};
use crate::linalg::{qubits_of, spectral_norm, CMatrix, OPERATOR_TOL};

/// Largest unitary whose unitarity is re-checked on construction.
const CHECKED_DIM: usize = 1 << 9;

#[derive(Clone, Debug)]
pub struct BlockEncoding {
    n: usize,
    a: usize,
    alpha: f64,
    epsilon: f64,
    unitary: CMatrix,
}

impl BlockEncoding {
    /// Wraps a unitary acting on `a` ancillas followed by `n` system qubits.
    pub fn new(unitary: CMatrix, n: usize, a: usize, alpha: f64, epsilon: f64) -> Result<Self> {
        let be = Self::from_parts(unitary, n, a, alpha, epsilon)?;
        if be.unitary.rows() <= CHECKED_DIM {
            let deviation = be.unitary.unitarity_deviation();
            if deviation > OPERATOR_TOL {
                return Err(Error::NotUnitary { deviation });
            }
        }
        Ok(be)
    }

    /// Constructor for unitaries that are unitary by construction (products
    /// and Kronecker products of unitaries); skips the `O(N³)` recheck.
    pub(crate) fn from_parts(
        unitary: CMatrix,
        n: usize,
        a: usize,
        alpha: f64,
        epsilon: f64,
    ) -> Result<Self> {
        check_cap(n + a)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )));
        }
        let dim = 1usize << (n + a);
        if unitary.rows() != dim || unitary.cols() != dim {
            return Err(Error::dims(
                "BlockEncoding",
                format!("{dim}x{dim}"),
                format!("{}x{}", unitary.rows(), unitary.cols()),
            ));
        }
        Ok(Self {
            n,
            a,
            alpha,
            epsilon,
            unitary,
        })
    }

    /// The `(1, 0, 0)` encoding of a unitary by itself.
    pub fn trivial(u: &CMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare {
                op: "trivial",
                rows: u.rows(),
                cols: u.cols(),
            });
        }
        let n = qubits_of(u.rows())?;
        let deviation = u.unitarity_deviation();
        if deviation > OPERATOR_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Self::from_parts(u.clone(), n, 0, 1.0, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn total_qubits(&self) -> usize {
        self.n + self.a
    }

    pub fn system_dim(&self) -> usize {
        1 << self.n
    }

    /// `(α, a, ε)`.
    pub fn contract(&self) -> (f64, usize, f64) {
        (self.alpha, self.a, self.epsilon)
    }

    /// `α·(⟨0^a| ⊗ I)U(|0^a⟩ ⊗ I)`.
    pub fn encoded_block(&self) -> CMatrix {
        let d = self.system_dim();
        self.unitary.sub_block(0, 0, d, d).scale_real(self.alpha)
    }

    /// Spectral-norm distance between `target` and the encoded block.
    pub fn verify(&self, target: &CMatrix) -> Result<f64> {
        let d = self.system_dim();
        if target.rows() != d || target.cols() != d {
            return Err(Error::dims(
                "verify",
                format!("{d}x{d}"),
                format!("{}x{}", target.rows(), target.cols()),
            ));
        }
        let norm = spectral_norm(target);
        if norm > self.alpha * (1.0 + 1e-9) {
            warn!(
                "target norm {norm:.6e} exceeds the encoding scale α = {:.6e}",
                self.alpha
            );
        }
        Ok(spectral_norm(&target.sub(&self.encoded_block())?))
    }

    /// Same unitary read as an encoding of `c·A`.
    pub fn rescale(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rescale factor must be positive, got {c}"
            )));
        }
        Ok(Self {
            alpha: self.alpha * c,
            epsilon: self.epsilon * c,
            ..self.clone()
        })
    }

    /// `I_{2^b} ⊗ U`: `b` extra idle ancillas in front.
    pub fn embed(&self, b: usize) -> Result<Self> {
        if b == 0 {
            return Ok(self.clone());
        }
        check_cap(self.total_qubits() + b)?;
        let u = CMatrix::identity(1 << b).kron(&self.unitary);
        Self::from_parts(u, self.n, self.a + b, self.alpha, self.epsilon)
    }

    /// Replaces the stored claim with `epsilon`.
    pub(crate) fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{pauli_x, pauli_z};
    use crate::linalg::dilate_to_unitary;
    use crate::random::{noisy_encoding, random_unitary, rng};
    use proptest::prelude::*;

    #[test]
    fn encoded_block_examples() {
        let id = CMatrix::identity(2);
        assert_eq!(BlockEncoding::trivial(&id).unwrap().encoded_block(), id);
        assert_eq!(BlockEncoding::trivial(&pauli_x()).unwrap().encoded_block(), pauli_x());
        let half = id.scale_real(0.5);
        let be = BlockEncoding::new(dilate_to_unitary(&half).unwrap(), 1, 1, 1.0, 0.0).unwrap();
        assert!(be.encoded_block().max_abs_diff(&half).unwrap() < 1e-15);
    }

    #[test]
    fn verify_examples() {
        let id = CMatrix::identity(2);
        assert_eq!(BlockEncoding::trivial(&id).unwrap().verify(&id).unwrap(), 0.0);
        let x = BlockEncoding::trivial(&pauli_x()).unwrap();
        assert!((x.verify(&pauli_z()).unwrap() - 2.0f64.sqrt()).abs() < 1e-12);
        assert!(x.verify(&CMatrix::identity(4)).is_err());
    }

    #[test]
    fn verify_scales_linearly() {
        let (be, target) = noisy_encoding(&mut rng(31), 2, 2, 1.0);
        let base = be.verify(&target).unwrap();
        let scaled = be.rescale(2.0).unwrap().verify(&target.scale_real(2.0)).unwrap();
        assert!((scaled - 2.0 * base).abs() < 1e-12);
    }

    #[test]
    fn trivial_examples() {
        let z = BlockEncoding::trivial(&pauli_z()).unwrap();
        assert_eq!(z.contract(), (1.0, 0, 0.0));
        let u = random_unitary(&mut rng(32), 4);
        assert!(BlockEncoding::trivial(&u).unwrap().verify(&u).unwrap() <= 1e-12);
        let not_unitary = CMatrix::from_real(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            BlockEncoding::trivial(&not_unitary),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn rescale_examples() {
        let id = CMatrix::identity(2);
        let be = BlockEncoding::trivial(&id).unwrap().rescale(2.0).unwrap();
        assert_eq!(be.encoded_block(), id.scale_real(2.0));
        assert_eq!(be.alpha(), 2.0);
        let twice = be.rescale(2.0).unwrap();
        let once = BlockEncoding::trivial(&id).unwrap().rescale(4.0).unwrap();
        assert_eq!(twice.contract(), once.contract());
        assert!(be.rescale(0.0).is_err());
        assert!(be.rescale(-1.0).is_err());

        let (be, target) = noisy_encoding(&mut rng(33), 1, 1, 1.0);
        let base = be.verify(&target).unwrap();
        let tripled = be.rescale(3.0).unwrap().verify(&target.scale_real(3.0)).unwrap();
        assert!((tripled - 3.0 * base).abs() < 1e-12);
    }

    #[test]
    fn embed_examples() {
        let x = BlockEncoding::trivial(&pauli_x()).unwrap();
        let e = x.embed(1).unwrap();
        assert_eq!(e.a(), 1);
        assert_eq!(e.verify(&pauli_x()).unwrap(), 0.0);
        assert_eq!(x.embed(0).unwrap().unitary(), x.unitary());
        let (be, target) = noisy_encoding(&mut rng(34), 1, 1, 1.3);
        let before = be.verify(&target).unwrap();
        let after = be.embed(2).unwrap().verify(&target).unwrap();
        assert!((before - after).abs() < 1e-12);
        assert!(matches!(x.embed(14), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn new_rejects_bad_contracts() {
        let u = CMatrix::identity(4);
        assert!(BlockEncoding::new(u.clone(), 1, 1, 0.0, 0.0).is_err());
        assert!(BlockEncoding::new(u.clone(), 1, 1, 1.0, -1.0).is_err());
        assert!(BlockEncoding::new(u, 2, 1, 1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn embed_and_rescale_commute(seed in 0u64..1000, b in 0usize..3, c in 0.1f64..5.0) {
            let (be, _) = noisy_encoding(&mut rng(seed), 1, 1, 1.0);
            let lhs = be.embed(b).unwrap().rescale(c).unwrap();
            let rhs = be.rescale(c).unwrap().embed(b).unwrap();
            prop_assert_eq!(lhs.contract(), rhs.contract());
            prop_assert_eq!(lhs.unitary(), rhs.unitary());
        }
    }
}
