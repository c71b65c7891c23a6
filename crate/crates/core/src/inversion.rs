//! Matrix inversion through an odd polynomial approximation of `1/x`.
//!
//! The polynomial transform of a Hermitian encoded matrix is realized by
//! evaluating `½P(Â/α)` on the eigenvalues of the encoded block and dilating
//! the result to a unitary. The stored claim is the transform's analytic
//! bound `4d√(ε/α) + δ`, which covers the dilation's exact output.
//!
//! # The approximating polynomial
//!
//! [`inv_poly`] interpolates the odd entire function
//!
//! ```text
//! T(x) = (3σ / 4x) · (1 − exp(−(x/s)^{2p})),   (σ/s)^{2p} = ln(3/(2δ))
//! ```
//!
//! On `|x| ≥ σ` the damping factor is at most `2δ/3`, so `T` is within `δ/2`
//! of `3σ/4x` there. Near the origin `T` behaves like `x^{2p−1}` and stays
//! bounded; `p` is the smallest exponent that keeps `max |T| ≤ 1 − δ`. The
//! Chebyshev series of `T` is cut at the first odd degree whose coefficient
//! tail is at most `δ/4`, which leaves room for both bounds, and the result is
//! checked on a dense grid before it is returned.

use log::warn;

use crate::blockenc::BlockEncoding;
use crate::combinators::{extend, unextend_inverse};
use crate::error::{Error, Result};
use crate::linalg::{dilate_to_unitary, eig_hermitian, CMatrix, CVector, C64, OPERATOR_TOL};
use crate::report::VerificationReport;
use crate::stateprep::{verify_pair, StatePreparationPair};

/// Grid used to certify a polynomial before it is returned.
pub const CHECK_GRID: usize = 10_000;

/// Odd polynomial in the Chebyshev basis, `P(x) = Σ_j c_j T_j(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OddPolynomial {
    coefficients: Vec<f64>,
}

impl OddPolynomial {
    /// Takes Chebyshev coefficients `c_0..=c_d`; every even-index entry must be zero.
    pub fn from_chebyshev(coefficients: Vec<f64>) -> Result<Self> {
        if !coefficients.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "an odd polynomial has an odd degree".into(),
            ));
        }
        if coefficients.iter().step_by(2).any(|&c| c != 0.0) {
            return Err(Error::InvalidParameter(
                "even Chebyshev coefficients must vanish".into(),
            ));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { coefficients })
    }

    /// `P(x) = x`.
    pub fn identity() -> Self {
        Self {
            coefficients: vec![0.0, 1.0],
        }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coefficients.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + self.coefficients[0]
    }

    /// `max |P|` on a uniform grid of `[−1, 1]`.
    pub fn sup_norm(&self, points: usize) -> f64 {
        grid(-1.0, 1.0, points)
            .map(|x| self.eval(x).abs())
            .fold(0.0, f64::max)
    }

    /// `max |P(x) − 3σ/(4x)|` over a uniform grid of `[σ, 1]` (the error on
    /// `[−1, −σ]` is the same by odd symmetry).
    pub fn inverse_error(&self, sigma: f64, points: usize) -> f64 {
        grid(sigma, 1.0, points)
            .map(|x| (self.eval(x) - 0.75 * sigma / x).abs())
            .fold(0.0, f64::max)
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(move |i| if i + 1 == points { hi } else { lo + step * i as f64 })
}

/// Odd polynomial `P` with `|P(x) − 3σ/(4x)| ≤ δ` on `[−1, −σ] ∪ [σ, 1]`
/// and `|P| ≤ 1` on `[−1, 1]`.
pub fn inv_poly(sigma: f64, delta: f64) -> Result<OddPolynomial> {
    if !(sigma > 0.0 && sigma <= 0.5) {
        return Err(Error::InvalidParameter(format!("σ = {sigma} outside (0, 1/2]")));
    }
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidParameter(format!("δ = {delta} outside (0, 1/2]")));
    }
    let lambda = (1.5 / delta).ln();
    let (p, s) = (1..=12)
        .map(|p| (p, sigma / lambda.powf(1.0 / (2 * p) as f64)))
        .find(|&(p, s)| {
            grid(0.0, 1.0, CHECK_GRID)
                .map(|x| damped_inverse(x, sigma, s, p))
                .fold(0.0, f64::max)
                <= 1.0 - delta
        })
        .ok_or_else(|| Error::InvalidParameter("no damping exponent keeps |T| ≤ 1 − δ".into()))?;
    let target = |x: f64| damped_inverse(x, sigma, s, p);

    let mut n = 256;
    let coefficients = loop {
        let c = chebyshev_interpolant(&target, n);
        let tail = c[n - n / 8..].iter().map(|v| v.abs()).fold(0.0, f64::max);
        if tail < 1e-4 * delta || n >= 1 << 16 {
            break c;
        }
        n *= 2;
    };

    // first odd degree with Σ_{j>d} |c_j| ≤ δ/4
    let mut tail: Vec<f64> = vec![0.0; coefficients.len() + 1];
    for j in (0..coefficients.len()).rev() {
        tail[j] = tail[j + 1] + if j % 2 == 1 { coefficients[j].abs() } else { 0.0 };
    }
    let degree = (1..coefficients.len())
        .step_by(2)
        .find(|&d| tail[d + 1] <= delta / 4.0)
        .ok_or_else(|| Error::InvalidParameter("Chebyshev series did not converge".into()))?;
    let truncated: Vec<f64> = coefficients[..=degree]
        .iter()
        .enumerate()
        .map(|(j, &c)| if j % 2 == 1 { c } else { 0.0 })
        .collect();
    let poly = OddPolynomial::from_chebyshev(truncated)?;

    let err = poly.inverse_error(sigma, CHECK_GRID);
    let sup = poly.sup_norm(CHECK_GRID);
    if err > delta || sup > 1.0 + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "polynomial failed certification: error {err:.3e} (δ = {delta:.1e}), sup {sup:.6}"
        )));
    }
    Ok(poly)
}

/// `(3σ/4x)(1 − exp(−(x/s)^{2p}))`, odd in `x`.
fn damped_inverse(x: f64, sigma: f64, s: f64, p: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let u = (x / s).abs().powi(2 * p as i32);
    0.75 * sigma * -(-u).exp_m1() / x
}

/// Chebyshev coefficients of the degree `n − 1` interpolant at the first-kind nodes.
fn chebyshev_interpolant(f: &impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
    let angle = |k: usize| std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
    let values: Vec<f64> = (0..n).map(|k| f(angle(k).cos())).collect();
    (0..n)
        .map(|j| {
            let sum: f64 = values
                .iter()
                .enumerate()
                .map(|(k, v)| v * (j as f64 * angle(k)).cos())
                .sum();
            let c = 2.0 * sum / n as f64;
            if j == 0 {
                c / 2.0
            } else {
                c
            }
        })
        .collect()
}

/// `(1, a+2, 4d√(ε/α) + δ)` encoding of `½P(A/α)` for a Hermitian encoded matrix.
pub fn poly_block_encoding(be: &BlockEncoding, p: &OddPolynomial, delta: f64) -> Result<BlockEncoding> {
    let block = be.encoded_block();
    let deviation = block.hermitian_deviation();
    if deviation > OPERATOR_TOL * be.alpha().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = eig_hermitian(&block)?;
    let alpha = be.alpha();
    let half_p = eig.map(|l| C64::new(0.5 * p.eval((l / alpha).clamp(-1.0, 1.0)), 0.0));
    let u = dilate_to_unitary(&half_p)?;
    let claim = 4.0 * p.degree() as f64 * (be.epsilon() / alpha).sqrt() + delta;
    BlockEncoding::from_parts(u, be.n(), 1, 1.0, claim)?.embed(be.a() + 1)
}

/// Parameters of an inverse encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct InversionParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    /// `(16/3)β`.
    pub beta_tilde: f64,
    /// `(4d√(ε/α) + δ)·β̃`.
    pub epsilon_tilde: f64,
    pub degree: usize,
    /// `2αβ`.
    pub kappa_bar: f64,
}

/// `(β̃, a+2, ε̃)` encoding of `A^{-1}` for Hermitian `A` with spectrum in
/// `[−α, −1/β] ∪ [1/β, α]`.
pub fn invert_hermitian(be: &BlockEncoding, beta: f64, delta: f64) -> Result<(BlockEncoding, InversionParams)> {
    if delta > 0.5 && delta <= 0.75 {
        warn!("δ = {delta} lies in (1/2, 3/4]; only (0, 1/2] is supported");
    }
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::InvalidParameter(format!("δ = {delta} outside (0, 1/2]")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("β = {beta} must be positive")));
    }
    let alpha = be.alpha();
    let block = be.encoded_block();
    let deviation = block.hermitian_deviation();
    if deviation > OPERATOR_TOL * alpha.max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = eig_hermitian(&block)?;
    let gap = 1.0 / beta - be.epsilon() - 1e-9;
    if let Some(&bad) = eig
        .values
        .iter()
        .find(|l| l.abs() < gap || l.abs() > alpha * (1.0 + 1e-9))
    {
        return Err(Error::EigenvalueOutOfRange {
            value: bad,
            bound: 1.0 / beta,
        });
    }

    let kappa_bar = 2.0 * alpha * beta;
    let p = inv_poly(1.0 / kappa_bar, delta)?;
    let poly_be = poly_block_encoding(be, &p, delta)?;
    let beta_tilde = 16.0 * beta / 3.0;
    let epsilon_tilde = poly_be.epsilon() * beta_tilde;
    let inv = poly_be.rescale(beta_tilde)?;
    debug_assert!((inv.epsilon() - epsilon_tilde).abs() <= 1e-12 * epsilon_tilde.max(1.0));
    let params = InversionParams {
        alpha,
        beta,
        delta,
        beta_tilde,
        epsilon_tilde,
        degree: p.degree(),
        kappa_bar,
    };
    Ok((inv.with_epsilon(epsilon_tilde), params))
}

/// `r·Σ_k w_k A_k^{-1}` from an encoding of `diag(A_0, …, A_{M−1})`.
///
/// The block-diagonal matrix is extended to a Hermitian one, inverted, read
/// back as `diag(A_k^{-1})`, and sandwiched between the state-preparation
/// pair for `w` on the block-index register. The result is a
/// `(τ, a+m+3, η)` encoding with `τ = (16/3)rβμ` and
/// `η = rβ(δ_w + (16/3)μ(4d√(2ε/α) + δ))`, where `β` bounds every
/// `‖A_k^{-1}‖` and `(α, a, ε)` is the block-diagonal contract.
///
/// The report's measured error compares against the inverses of the blocks
/// actually encoded.
pub fn lincomb_of_inverses(
    be_blockdiag: &BlockEncoding,
    pair: &StatePreparationPair,
    w: &CVector,
    beta: f64,
    r: f64,
    delta: f64,
) -> Result<(BlockEncoding, VerificationReport)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r = {r} must be positive")));
    }
    let m = pair.m();
    if be_blockdiag.n() < m {
        return Err(Error::dims("lincomb_of_inverses", format!("at least {m} system qubits"), be_blockdiag.n()));
    }
    let measured_pair = verify_pair(pair, w)?;
    if measured_pair > pair.delta() + 1e-9 {
        return Err(Error::PairMismatch {
            measured: measured_pair,
            claimed: pair.delta(),
        });
    }
    let n = be_blockdiag.n() - m;

    let extended = extend(be_blockdiag)?;
    let (inv_ext, params) = invert_hermitian(&extended, beta, delta)?;
    let inv = unextend_inverse(&inv_ext)?;

    let a_tilde = inv.a();
    let left = CMatrix::identity(1 << a_tilde)
        .kron(&pair.v_l().adjoint())
        .kron(&CMatrix::identity(1 << n));
    let right = CMatrix::identity(1 << a_tilde)
        .kron(pair.v_r())
        .kron(&CMatrix::identity(1 << n));
    let u = CMatrix::mul_chain(&[&left, inv.unitary(), &right])?;

    let mu = pair.mu();
    let tau = r * params.beta_tilde * mu;
    let eta = r * (beta * pair.delta() + mu * params.epsilon_tilde);
    let be = BlockEncoding::from_parts(u, n, a_tilde + m, tau, eta)?;

    let dense = inverse_combination(&be_blockdiag.encoded_block(), w, m, r)?;
    let measured = crate::linalg::spectral_norm(&dense.sub(&be.encoded_block())?);
    let report = VerificationReport {
        tau,
        eta,
        eps_m: None,
        delta_l: pair.delta(),
        degree_d: params.degree,
        alpha_prime: be_blockdiag.alpha(),
        beta_prime: beta,
        measured_error_vs_fm: measured,
        measured_error_vs_f: None,
        pass: false,
    }
    .evaluate();
    Ok((be, report))
}

/// `r·Σ_k w_k B_k^{-1}` for the diagonal blocks `B_k` of a `2^{m+n}` matrix.
pub fn inverse_combination(blockdiag: &CMatrix, w: &CVector, m: usize, r: f64) -> Result<CMatrix> {
    let dim = blockdiag.rows() >> m;
    let mut acc = CMatrix::zeros(dim, dim);
    for (k, wk) in w.0.iter().enumerate() {
        if k >= 1 << m {
            return Err(Error::IndexOutOfRange { index: k, limit: 1 << m });
        }
        let block = blockdiag.sub_block(k * dim, k * dim, dim, dim);
        acc.axpy(*wk * r, &block.inverse()?)?;
    }
    Ok(acc)
}
