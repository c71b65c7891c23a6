//! Matrix functions from quadrature rules over resolvents.
//!
//! Two pipelines live here. The circle pipeline discretizes Cauchy's integral
//! with the `M`-point trapezoidal rule on `|z − z₀| = r`,
//!
//! ```text
//! f_M(A) = (1/M) Σ_k f(z_k) r e^{iθ_k} (z_k I − A)^{-1},   z_k = z₀ + r e^{iθ_k},
//! ```
//!
//! and the general pipeline takes any rule of the form
//! `𝓕_M(A) = r Σ_k w_k (y_k I + z_k A)^{-1}` as input. Both stack the shifted
//! matrices into one block-diagonal encoding and hand it to
//! [`lincomb_of_inverses`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blockenc::BlockEncoding;
use crate::circuits::phase_R_gates;
use crate::combinators::{diagonal, identity_encoding, linear_combination_tensor};
use crate::error::{Error, Result};
use crate::inversion::lincomb_of_inverses;
use crate::linalg::{eig_hermitian, min_singular_value, qubits_of, spectral_norm, CMatrix, CVector, C64, ONE, ZERO};
use crate::report::VerificationReport;
use crate::stateprep::{build_sqrt_pair, verify_pair, StatePreparationPair};

/// Boundary samples used for `‖f‖_∞` over a disk.
pub const SUP_SAMPLES: usize = 4096;

/// Analytic scalar functions with known Taylor data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFunction {
    Exp,
    /// Principal branch.
    Log,
    /// `z^{-1/2}`, principal branch.
    InvSqrt,
    /// `Σ_k c_k (z − center)^k`.
    Polynomial { center: C64, coefficients: Vec<C64> },
}

impl ScalarFunction {
    pub fn constant(c: f64) -> Self {
        ScalarFunction::Polynomial {
            center: ZERO,
            coefficients: vec![C64::new(c, 0.0)],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarFunction::Exp => "exp",
            ScalarFunction::Log => "log",
            ScalarFunction::InvSqrt => "inv_sqrt",
            ScalarFunction::Polynomial { .. } => "polynomial",
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        match self {
            ScalarFunction::Exp => z.exp(),
            ScalarFunction::Log => z.ln(),
            ScalarFunction::InvSqrt => z.sqrt().inv(),
            ScalarFunction::Polynomial { center, coefficients } => coefficients
                .iter()
                .rev()
                .fold(ZERO, |acc, c| acc * (z - center) + c),
        }
    }

    /// Rejects disks `|z − z₀| ≤ radius` that touch the branch cut `(−∞, 0]`.
    pub fn check_domain(&self, z0: C64, radius: f64) -> Result<()> {
        if matches!(self, ScalarFunction::Log | ScalarFunction::InvSqrt) {
            let distance = if z0.re > 0.0 { z0.norm() } else { z0.im.abs() };
            if distance <= radius {
                return Err(Error::BranchCut {
                    function: self.name(),
                    z0: format!("{}{:+}i", z0.re, z0.im),
                    radius,
                });
            }
        }
        Ok(())
    }

    /// `a_0, …, a_{count−1}` of the Taylor series about `z0`.
    pub fn taylor_coefficients(&self, z0: C64, count: usize) -> Vec<C64> {
        match self {
            ScalarFunction::Exp => {
                let mut a = z0.exp();
                (0..count)
                    .map(|l| {
                        if l > 0 {
                            a /= l as f64;
                        }
                        a
                    })
                    .collect()
            }
            ScalarFunction::Log => (0..count)
                .map(|l| {
                    if l == 0 {
                        z0.ln()
                    } else {
                        let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
                        C64::new(sign / l as f64, 0.0) / z0.powu(l as u32)
                    }
                })
                .collect(),
            ScalarFunction::InvSqrt => {
                // binom(−1/2, l) z0^{−1/2−l}
                let mut a = z0.sqrt().inv();
                (0..count)
                    .map(|l| {
                        if l > 0 {
                            a *= (-0.5 - (l - 1) as f64) / l as f64;
                            a /= z0;
                        }
                        a
                    })
                    .collect()
            }
            ScalarFunction::Polynomial { center, coefficients } => {
                let h = z0 - center;
                (0..count)
                    .map(|l| {
                        let mut acc = ZERO;
                        let mut binom = 1.0;
                        let mut hp = ONE;
                        for (k, &c) in coefficients.iter().enumerate().skip(l) {
                            if k > l {
                                binom = binom * k as f64 / (k - l) as f64;
                                hp *= h;
                            }
                            acc += c * binom * hp;
                        }
                        acc
                    })
                    .collect()
            }
        }
    }

    /// Truncated Taylor polynomial `f̃_L(z) = Σ_{ℓ<L} a_ℓ (z − z₀)^ℓ`.
    pub fn taylor_eval(coefficients: &[C64], z0: C64, z: C64) -> C64 {
        coefficients.iter().rev().fold(ZERO, |acc, c| acc * (z - z0) + c)
    }

    /// `max |f|` over the disk `|z − z₀| ≤ radius`, sampled on its boundary.
    pub fn sup_norm(&self, z0: C64, radius: f64) -> f64 {
        (0..SUP_SAMPLES)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / SUP_SAMPLES as f64;
                self.eval(z0 + Complex64::from_polar(radius, theta)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `f(A)` for a matrix whose shifted norm `‖A − z₀I‖` is below `radius`.
    ///
    /// Hermitian inputs go through the eigendecomposition; everything else
    /// sums the Taylor series about `z₀` until the terms drop below machine
    /// precision.
    pub fn apply(&self, a: &CMatrix, z0: C64, radius: f64) -> Result<CMatrix> {
        self.check_domain(z0, radius)?;
        let n = a.rows();
        let shifted = a.sub(&CMatrix::identity(n).scale(z0))?;
        let s = spectral_norm(&shifted);
        if s >= radius {
            return Err(Error::SpectrumNotEnclosed {
                norm_shift: s,
                r: radius,
            });
        }
        if a.hermitian_deviation() <= 1e-13 * a.frobenius_norm().max(1.0) {
            let eig = eig_hermitian(a)?;
            return Ok(eig.map(|l| self.eval(C64::new(l, 0.0))));
        }
        let terms = if s == 0.0 {
            1
        } else {
            ((1e-18f64).ln() / (s / radius).ln()).ceil().clamp(1.0, 20_000.0) as usize + 8
        };
        let coefficients = self.taylor_coefficients(z0, terms);
        // Horner in the matrix argument
        let mut acc = CMatrix::zeros(n, n);
        for c in coefficients.iter().rev() {
            acc = acc.mul(&shifted)?;
            acc.axpy(*c, &CMatrix::identity(n))?;
        }
        Ok(acc)
    }
}

/// Trapezoidal rule on the circle `|z − z₀| = r` with `M = 2^m` nodes,
/// inside an analyticity disk of radius `R`, with Taylor data cut at `L` terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleContour {
    pub z0: C64,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "M")]
    pub points: usize,
    #[serde(rename = "L")]
    pub taylor_terms: usize,
}

impl CircleContour {
    pub fn new(z0: C64, r: f64, big_r: f64, points: usize, taylor_terms: usize) -> Result<Self> {
        let c = Self {
            z0,
            r,
            big_r,
            points,
            taylor_terms,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < self.big_r && self.big_r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < r < R, got r = {}, R = {}",
                self.r, self.big_r
            )));
        }
        if self.points < 2 || !self.points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "M = {} must be a power of two ≥ 2",
                self.points
            )));
        }
        if self.taylor_terms == 0 {
            return Err(Error::InvalidParameter("L must be at least 1".into()));
        }
        Ok(())
    }

    /// `m = log₂ M`.
    pub fn index_qubits(&self) -> usize {
        self.points.trailing_zeros() as usize
    }

    /// `θ_k = 2πk/M`.
    pub fn theta(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.points as f64
    }

    /// `z₀ + r e^{iθ_k}`.
    pub fn node(&self, k: usize) -> C64 {
        self.z0 + Complex64::from_polar(self.r, self.theta(k))
    }

    /// `(1 − r/R)^{-1} (r/R)^L`.
    pub fn delta_l(&self) -> f64 {
        let q = self.r / self.big_r;
        q.powi(self.taylor_terms as i32) / (1.0 - q)
    }

    /// The same rule written as `r Σ w_k (y_k I + z_k A)^{-1}`.
    pub fn as_quadrature(&self, f: &ScalarFunction) -> Result<QuadratureScheme> {
        let (w, _, _) = trapezoid_weights(f, self)?;
        let y = CVector((0..self.points).map(|k| self.node(k)).collect());
        let z = CVector(vec![-ONE; self.points]);
        QuadratureScheme::new(w, y, z, self.r)
    }
}

/// Nodes and weights of `𝓕_M(A) = r Σ_k w_k (y_k I + z_k A)^{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureScheme {
    pub w: CVector,
    pub y: CVector,
    pub z: CVector,
    pub r: f64,
}

impl QuadratureScheme {
    pub fn new(w: CVector, y: CVector, z: CVector, r: f64) -> Result<Self> {
        let m = w.dim();
        if y.dim() != m || z.dim() != m {
            return Err(Error::dims(
                "QuadratureScheme",
                format!("{m} nodes"),
                format!("{} y, {} z", y.dim(), z.dim()),
            ));
        }
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "node count {m} must be a power of two ≥ 2"
            )));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("r = {r} must be positive")));
        }
        Ok(Self { w, y, z, r })
    }

    pub fn len(&self) -> usize {
        self.w.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.w.dim() == 0
    }

    pub fn index_qubits(&self) -> usize {
        self.len().trailing_zeros() as usize
    }

    /// `y_k I + z_k A`.
    pub fn shifted(&self, a: &CMatrix, k: usize) -> Result<CMatrix> {
        let n = a.rows();
        CMatrix::identity(n).scale(self.y[k]).add(&a.scale(self.z[k]))
    }
}

fn shift_norm(a: &CMatrix, z0: C64) -> Result<f64> {
    Ok(spectral_norm(&a.sub(&CMatrix::identity(a.rows()).scale(z0))?))
}

/// Dense trapezoidal approximation `f_M(A)`.
#[allow(non_snake_case)]
pub fn f_M_dense(a: &CMatrix, f: &ScalarFunction, c: &CircleContour) -> Result<CMatrix> {
    c.validate()?;
    f.check_domain(c.z0, c.big_r)?;
    let s = shift_norm(a, c.z0)?;
    if s >= c.r {
        return Err(Error::SpectrumNotEnclosed { norm_shift: s, r: c.r });
    }
    let n = a.rows();
    let mut acc = CMatrix::zeros(n, n);
    for k in 0..c.points {
        let zk = c.node(k);
        let resolvent = CMatrix::identity(n).scale(zk).sub(a)?.inverse()?;
        let weight = f.eval(zk) * Complex64::from_polar(c.r, c.theta(k)) / c.points as f64;
        acc.axpy(weight, &resolvent)?;
    }
    Ok(acc)
}

/// Exact weights `w_k = f(z_k)e^{iθ_k}/M`, truncated-Taylor weights `w̃_k`, and `δ_L`.
pub fn trapezoid_weights(f: &ScalarFunction, c: &CircleContour) -> Result<(CVector, CVector, f64)> {
    c.validate()?;
    f.check_domain(c.z0, c.big_r)?;
    let taylor = f.taylor_coefficients(c.z0, c.taylor_terms);
    let m = c.points as f64;
    let mut w = Vec::with_capacity(c.points);
    let mut w_tilde = Vec::with_capacity(c.points);
    for k in 0..c.points {
        let zk = c.node(k);
        let phase = Complex64::from_polar(1.0, c.theta(k));
        w.push(f.eval(zk) * phase / m);
        w_tilde.push(ScalarFunction::taylor_eval(&taylor, c.z0, zk) * phase / m);
    }
    Ok((CVector(w), CVector(w_tilde), c.delta_l()))
}

/// `‖𝔸‖ ≤ r + |z₀| + ‖A‖` and `‖𝔸^{-1}‖ ≤ 1/(r − ‖A − z₀I‖)`.
pub fn circle_norm_bounds(c: &CircleContour, norm_a: f64, norm_a_shift: f64) -> Result<(f64, f64)> {
    if norm_a_shift >= c.r {
        return Err(Error::SpectrumNotEnclosed {
            norm_shift: norm_a_shift,
            r: c.r,
        });
    }
    Ok((c.r + c.z0.norm() + norm_a, 1.0 / (c.r - norm_a_shift)))
}

/// Encoding of `𝔸 = z₀I + r𝖱 ⊗ I − I ⊗ A = diag(z_k I − A)`.
///
/// Four tensor-product terms `(I, I)`, `(𝖱, I)`, `(I, U_A)`, `(I, I)` with
/// coefficients `(z₀, r, −1, 0)` share a two-qubit selector, giving an
/// `(r + |z₀| + α, a+2, ε_A)` encoding.
pub fn block_diag_circle(be_a: &BlockEncoding, c: &CircleContour) -> Result<BlockEncoding> {
    c.validate()?;
    let m = c.index_qubits();
    let n = be_a.n();
    let id_m = identity_encoding(m)?;
    let id_n = identity_encoding(n)?;
    let phases = BlockEncoding::trivial(&phase_R_gates(m)?)?;
    let y = CVector(vec![c.z0, C64::new(c.r, 0.0), -ONE, ZERO]);
    let pair_vector = CVector(vec![c.z0, C64::new(c.r, 0.0), C64::new(-be_a.alpha(), 0.0), ZERO]);
    let pair = build_sqrt_pair(&pair_vector, 2)?;
    linear_combination_tensor(
        &[id_m.clone(), phases, id_m.clone(), id_m],
        &[id_n.clone(), id_n.clone(), be_a.clone(), id_n],
        &y,
        &pair,
    )
}

/// Pair built from the truncated weights `w̃` and re-labelled with
/// `μ = ‖w‖₁` and `δ = 2‖f‖_∞ δ_L`, a valid claim against the exact `w`.
pub fn stateprep_truncated(f: &ScalarFunction, c: &CircleContour) -> Result<StatePreparationPair> {
    let (w, w_tilde, delta_l) = trapezoid_weights(f, c)?;
    let pair = build_sqrt_pair(&w_tilde, c.index_qubits())?;
    let sup = f.sup_norm(c.z0, c.big_r);
    pair.with_claim(w.norm1(), 2.0 * sup * delta_l)
}

/// Closed-form trapezoidal error bound `ε_M`, with `s = ‖A − z₀I‖`:
///
/// ```text
/// ‖f‖_∞/(1 − s/R) · [ (s/r)^M/(1 − (s/r)^M) + (r/R)^M/(1 − (r/R)^M) ]
/// ```
pub fn trapezoid_error_bound(c: &CircleContour, f: &ScalarFunction, norm_a_shift: f64) -> Result<f64> {
    c.validate()?;
    if !(norm_a_shift >= 0.0 && norm_a_shift < c.r) {
        return Err(Error::SpectrumNotEnclosed {
            norm_shift: norm_a_shift,
            r: c.r,
        });
    }
    f.check_domain(c.z0, c.big_r)?;
    let sup = f.sup_norm(c.z0, c.big_r);
    let m = c.points as i32;
    let q_inner = (norm_a_shift / c.r).powi(m);
    let q_outer = (c.r / c.big_r).powi(m);
    Ok(sup / (1.0 - norm_a_shift / c.big_r)
        * (q_inner / (1.0 - q_inner) + q_outer / (1.0 - q_outer)))
}

/// `(τ, a+m+5, η)` encoding of `f_M(A)` from an encoding of `A`.
///
/// `‖A − z₀I‖` is bounded by `‖Â − z₀I‖ + ε_A`, with `Â` the block the input
/// actually encodes; `β′` comes from [`circle_norm_bounds`]. The stored
/// error is
///
/// ```text
/// η = ‖f‖_∞/(1 − s/r) · (2δ_L + (16/3)(4d√(2ε_A/α′) + δ))
/// ```
///
/// and the report measures against `f_M(Â)` and `f(Â)`.
#[allow(non_snake_case)]
pub fn build_fM_encoding(
    be_a: &BlockEncoding,
    f: &ScalarFunction,
    c: &CircleContour,
    delta: f64,
) -> Result<(BlockEncoding, VerificationReport)> {
    c.validate()?;
    f.check_domain(c.z0, c.big_r)?;
    let a_hat = be_a.encoded_block();
    let s = shift_norm(&a_hat, c.z0)? + be_a.epsilon();
    let (alpha_prime, beta_prime) = circle_norm_bounds(c, be_a.alpha(), s)?;

    let blockdiag = block_diag_circle(be_a, c)?;
    let (w, _, delta_l) = trapezoid_weights(f, c)?;
    let pair = stateprep_truncated(f, c)?;
    let (encoding, inner) = lincomb_of_inverses(&blockdiag, &pair, &w, beta_prime, c.r, delta)?;

    let sup = f.sup_norm(c.z0, c.big_r);
    let d = inner.degree_d as f64;
    let eta = sup / (1.0 - s / c.r)
        * (2.0 * delta_l
            + 16.0 / 3.0 * (4.0 * d * (2.0 * be_a.epsilon() / alpha_prime).sqrt() + delta));
    let encoding = encoding.with_epsilon(eta);
    let tau = encoding.alpha();
    let block = encoding.encoded_block();

    let f_m = f_M_dense(&a_hat, f, c)?;
    let exact = f.apply(&a_hat, c.z0, c.big_r)?;
    let report = VerificationReport {
        tau,
        eta,
        eps_m: Some(trapezoid_error_bound(c, f, s)?),
        delta_l,
        degree_d: inner.degree_d,
        alpha_prime,
        beta_prime,
        measured_error_vs_fm: spectral_norm(&f_m.sub(&block)?),
        measured_error_vs_f: Some(spectral_norm(&exact.sub(&block)?)),
        pass: false,
    }
    .evaluate();
    Ok((encoding, report))
}

/// Encoding of `𝔸 = Y ⊗ I + Z ⊗ A = diag(y_k I + z_k A)`, contract
/// `(y_max + z_max α, a+2, z_max ε_A)`.
///
/// `Y` and `Z` are diagonal encodings; a vanishing one is replaced by an
/// identity term of weight zero so the register layout does not change.
pub fn block_diag_general(be_a: &BlockEncoding, q: &QuadratureScheme) -> Result<BlockEncoding> {
    let m = q.index_qubits();
    let n = be_a.n();
    let (y_max, z_max) = (q.y.max_abs(), q.z.max_abs());
    if y_max == 0.0 && z_max == 0.0 {
        return Err(Error::ZeroVector);
    }
    let term = |v: &CVector, vmax: f64| -> Result<(BlockEncoding, C64)> {
        if vmax > 0.0 {
            Ok((diagonal(v)?, ONE))
        } else {
            Ok((identity_encoding(m)?, ZERO))
        }
    };
    let (enc_y, coef_y) = term(&q.y, y_max)?;
    let (enc_z, coef_z) = term(&q.z, z_max)?;
    let y = CVector(vec![coef_y, coef_z]);
    let pair_vector = CVector(vec![coef_y * y_max, coef_z * z_max * be_a.alpha()]);
    let pair = build_sqrt_pair(&pair_vector, 1)?;
    linear_combination_tensor(
        &[enc_y, enc_z],
        &[identity_encoding(n)?, be_a.clone()],
        &y,
        &pair,
    )
}

/// Dense `r Σ_k w_k (y_k I + z_k A)^{-1}`; singular shifts are reported by index.
pub fn general_dense(a: &CMatrix, q: &QuadratureScheme) -> Result<CMatrix> {
    let n = a.rows();
    let mut acc = CMatrix::zeros(n, n);
    for k in 0..q.len() {
        let inv = q
            .shifted(a, k)?
            .inverse()
            .map_err(|_| Error::Singular(format!("y_{k} I + z_{k} A is singular")))?;
        acc.axpy(q.w[k] * q.r, &inv)?;
    }
    Ok(acc)
}

/// `(τ, a+m+5, η)` encoding of `𝓕_M(A)` for a supplied quadrature rule.
///
/// `β′` must bound every `‖(y_k I + z_k A)^{-1}‖`; singular shifts are
/// rejected before anything is built. `τ = (16/3) r β′ μ` and
/// `η = r β′ (δ_w + (16/3) μ (4d√(2 z_max ε_A/(y_max + z_max α)) + δ))`.
#[allow(non_snake_case)]
pub fn build_FM_encoding(
    be_a: &BlockEncoding,
    q: &QuadratureScheme,
    pair: &StatePreparationPair,
    beta_prime: f64,
    delta: f64,
) -> Result<(BlockEncoding, VerificationReport)> {
    let measured_pair = verify_pair(pair, &q.w)?;
    if measured_pair > pair.delta() + 1e-9 {
        return Err(Error::PairMismatch {
            measured: measured_pair,
            claimed: pair.delta(),
        });
    }
    let a_hat = be_a.encoded_block();
    let slack = q.z.max_abs() * be_a.epsilon();
    for k in 0..q.len() {
        let shifted = q.shifted(&a_hat, k)?;
        let smin = min_singular_value(&shifted)?;
        if smin <= 1e-12 * spectral_norm(&shifted).max(1.0) {
            return Err(Error::Singular(format!(
                "y_{k} I + z_{k} A has smallest singular value {smin:.3e}"
            )));
        }
        if smin < 1.0 / beta_prime - slack - 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "β′ = {beta_prime} does not bound ‖(y_{k} I + z_{k} A)^-1‖ = {:.6e}",
                1.0 / smin
            )));
        }
    }
    let blockdiag = block_diag_general(be_a, q)?;
    let (encoding, inner) = lincomb_of_inverses(&blockdiag, pair, &q.w, beta_prime, q.r, delta)?;
    let dense = general_dense(&a_hat, q)?;
    let report = VerificationReport {
        measured_error_vs_fm: spectral_norm(&dense.sub(&encoding.encoded_block())?),
        delta_l: 0.0,
        ..inner
    }
    .evaluate();
    Ok((encoding, report))
}

/// `f(A)` for a 2^n × 2^n matrix, via [`ScalarFunction::apply`] about `c.z0`
/// within the analyticity radius.
pub fn exact_function(a: &CMatrix, f: &ScalarFunction, c: &CircleContour) -> Result<CMatrix> {
    qubits_of(a.rows())?;
    f.apply(a, c.z0, c.big_r)
}
