//! State-preparation pairs for linear combinations.
//!
//! A pair `(V_L, V_R)` prepares `c = V_L|0^m⟩` and `d = V_R|0^m⟩` whose
//! products recombine as `μ·c_j^*·d_j ≈ v_j`.

use crate::error::{Error, Result};
use crate::linalg::{complete_to_unitary, CMatrix, CVector};

/// Tolerance on `c_j^* d_j` over the padded tail.
const TAIL_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct StatePreparationPair {
    m: usize,
    mu: f64,
    delta: f64,
    v_l: CMatrix,
    v_r: CMatrix,
    t: usize,
}

impl StatePreparationPair {
    /// Pair from explicit unitaries; `t` is the number of active coefficients.
    pub fn new(v_l: CMatrix, v_r: CMatrix, m: usize, t: usize, mu: f64, delta: f64) -> Result<Self> {
        let dim = 1usize << m;
        for (name, u) in [("V_L", &v_l), ("V_R", &v_r)] {
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::dims(
                    "StatePreparationPair",
                    format!("{name} of size {dim}x{dim}"),
                    format!("{}x{}", u.rows(), u.cols()),
                ));
            }
            let deviation = u.unitarity_deviation();
            if deviation > crate::linalg::OPERATOR_TOL {
                return Err(Error::NotUnitary { deviation });
            }
        }
        if t == 0 || t > dim {
            return Err(Error::IndexOutOfRange { index: t, limit: dim });
        }
        if !(mu > 0.0 && mu.is_finite()) || !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pair needs μ > 0 and δ ≥ 0, got μ = {mu}, δ = {delta}"
            )));
        }
        let pair = Self {
            m,
            mu,
            delta,
            v_l,
            v_r,
            t,
        };
        let tail = pair.tail_overlap();
        if tail > TAIL_TOL {
            return Err(Error::InvalidParameter(format!(
                "c_j^* d_j = {tail:.3e} on the padded tail"
            )));
        }
        Ok(pair)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn v_l(&self) -> &CMatrix {
        &self.v_l
    }

    pub fn v_r(&self) -> &CMatrix {
        &self.v_r
    }

    /// `V_L|0^m⟩`.
    pub fn left_state(&self) -> CVector {
        self.v_l.column(0)
    }

    /// `V_R|0^m⟩`.
    pub fn right_state(&self) -> CVector {
        self.v_r.column(0)
    }

    /// `μ·c_j^*·d_j` for the active coefficients.
    pub fn recombined(&self) -> CVector {
        let (c, d) = (self.left_state(), self.right_state());
        CVector((0..self.t).map(|j| c[j].conj() * d[j] * self.mu).collect())
    }

    fn tail_overlap(&self) -> f64 {
        let (c, d) = (self.left_state(), self.right_state());
        (self.t..1 << self.m)
            .map(|j| (c[j].conj() * d[j]).norm())
            .fold(0.0, f64::max)
    }

    /// Same unitaries under a different `(μ, δ)` claim.
    pub fn with_claim(&self, mu: f64, delta: f64) -> Result<Self> {
        Self::new(self.v_l.clone(), self.v_r.clone(), self.m, self.t, mu, delta)
    }
}

/// `(‖v‖₁, m, 0)` pair with `c_j = conj(√v_j)/√‖v‖₁` and `d_j = √v_j/√‖v‖₁`.
///
/// Taking `c_j` as the conjugate of the principal root (rather than the root
/// of the conjugate) gives `c_j^*·d_j = √v_j·√v_j = v_j/‖v‖₁` for every
/// complex `v_j`, including the negative real axis where the two differ.
pub fn build_sqrt_pair(v: &CVector, m: usize) -> Result<StatePreparationPair> {
    let dim = 1usize << m;
    if v.dim() == 0 || v.dim() > dim {
        return Err(Error::dims("build_sqrt_pair", format!("1..={dim} coefficients"), v.dim()));
    }
    let mu = v.norm1();
    if mu == 0.0 {
        return Err(Error::ZeroVector);
    }
    let scale = mu.sqrt();
    let roots: Vec<_> = v.0.iter().map(|z| z.sqrt() / scale).collect();
    let c = CVector(roots.iter().map(|z| z.conj()).collect()).padded(dim);
    let d = CVector(roots).padded(dim);
    let v_l = complete_to_unitary(&renormalize(c))?;
    let v_r = complete_to_unitary(&renormalize(d))?;
    StatePreparationPair::new(v_l, v_r, m, v.dim(), mu, 0.0)
}

// the amplitudes have unit norm analytically; remove rounding before completion
fn renormalize(v: CVector) -> CVector {
    let n = v.norm2();
    CVector(v.0.into_iter().map(|z| z / n).collect())
}

/// `Σ_j |μ c_j^* d_j − v_j|` plus the largest `|c_j^* d_j|` on the padded tail.
pub fn verify_pair(p: &StatePreparationPair, v: &CVector) -> Result<f64> {
    if v.dim() != p.t {
        return Err(Error::dims("verify_pair", p.t, v.dim()));
    }
    let err: f64 = p
        .recombined()
        .0
        .iter()
        .zip(&v.0)
        .map(|(a, b)| (a - b).norm())
        .sum();
    Ok(err + p.tail_overlap())
}

/// Smallest `m` with `2^m ≥ len` (at least 1).
pub fn index_qubits(len: usize) -> usize {
    let mut m = 1;
    while (1usize << m) < len {
        m += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::random::{random_coefficients, rng};
    use proptest::prelude::*;

    #[test]
    fn uniform_vector() {
        let p = build_sqrt_pair(&CVector::from_real(&[1.0; 4]), 2).unwrap();
        assert_eq!(p.mu(), 4.0);
        for j in 0..4 {
            assert!((p.left_state()[j] - C64::new(0.5, 0.0)).norm() < 1e-15);
            assert!((p.right_state()[j] - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn negative_entry_uses_principal_root() {
        let p = build_sqrt_pair(&CVector::from_real(&[1.0, -1.0]), 1).unwrap();
        assert_eq!(p.mu(), 2.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p.left_state()[1] - C64::new(0.0, -s)).norm() < 1e-15);
        assert!((p.right_state()[1] - C64::new(0.0, s)).norm() < 1e-15);
        assert!((p.recombined()[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn random_vector_is_exact() {
        let v = random_coefficients(&mut rng(41), 4);
        let p = build_sqrt_pair(&v, 2).unwrap();
        assert!(verify_pair(&p, &v).unwrap() <= 1e-12);
    }

    #[test]
    fn mismatch_against_another_vector() {
        let built = CVector::from_real(&[1.0, 2.0]);
        let other = CVector(vec![C64::new(1.0, 1.0), C64::new(2.0, 0.0)]);
        let p = build_sqrt_pair(&built, 1).unwrap();
        // only the first entry differs, by i
        assert!((verify_pair(&p, &other).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubled_mu_costs_the_whole_norm() {
        let v = random_coefficients(&mut rng(42), 3);
        let p = build_sqrt_pair(&v, 2).unwrap();
        let wrong = p.with_claim(2.0 * p.mu(), 0.0).unwrap();
        assert!((verify_pair(&wrong, &v).unwrap() - v.norm1()).abs() < 1e-12);
    }

    #[test]
    fn padding_and_errors() {
        let v = CVector::from_real(&[0.3, -0.2, 0.5]);
        let p = build_sqrt_pair(&v, 2).unwrap();
        assert_eq!(p.t(), 3);
        assert_eq!(p.right_state()[3], C64::new(0.0, 0.0));
        assert!(matches!(
            build_sqrt_pair(&CVector::zeros(2), 1),
            Err(Error::ZeroVector)
        ));
        assert!(build_sqrt_pair(&CVector::from_real(&[1.0; 3]), 1).is_err());
        assert!(verify_pair(&p, &CVector::from_real(&[1.0])).is_err());
        assert_eq!(index_qubits(1), 1);
        assert_eq!(index_qubits(4), 2);
        assert_eq!(index_qubits(5), 3);
    }

    proptest! {
        #[test]
        fn branch_consistency(re in -3.0f64..3.0, im in prop_oneof![Just(0.0), Just(-0.0), -3.0f64..3.0]) {
            let w = C64::new(re, im);
            let c = w.sqrt().conj();
            let d = w.sqrt();
            prop_assert!((c.conj() * d - w).norm() <= 1e-12 * (1.0 + w.norm()));
        }

        #[test]
        fn built_pairs_recombine(seed in 0u64..500, len in 1usize..=8) {
            let v = random_coefficients(&mut rng(seed), len);
            let p = build_sqrt_pair(&v, 3).unwrap();
            for (a, b) in p.recombined().0.iter().zip(&v.0) {
                prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
            }
        }
    }
}
