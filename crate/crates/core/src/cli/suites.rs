//! Randomized contract suites behind `qmatfunc verify`.
//!
//! Each trial draws a fresh instance from its own ChaCha stream, builds an
//! encoding, and records measured error over claimed error (with the usual
//! `1e-8` slack in the denominator). A suite passes when no trial exceeds 1.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::CliError;
use crate::blockenc::BlockEncoding;
use crate::circuits::QUBIT_CAP;
use crate::combinators::{
    diagonal, extend, extension_inverse, hermitian_extension, linear_combination, linear_combination_tensor,
    product, tensor, unextend_inverse,
};
use crate::error::Result;
use crate::inversion::{invert_hermitian, lincomb_of_inverses};
use crate::linalg::{dilate_to_unitary, spectral_norm, CMatrix, CVector, C64};
use crate::matfunc::{build_FM_encoding, build_fM_encoding, CircleContour, QuadratureScheme, ScalarFunction};
use crate::random::{
    gaussian, hermitian_with_spectrum, noisy_encoding, random_coefficients, random_hermitian, random_unitary,
    random_with_norm, rng_for, TestRng,
};
use crate::report::CONTRACT_SLACK;
use crate::stateprep::{build_sqrt_pair, index_qubits};

/// The pipeline suites need eight qubits for their smallest instances.
pub const MIN_VERIFY_QUBITS: usize = 8;

pub const SUITES: [&str; 11] = [
    "product",
    "tensor",
    "linear_combination",
    "linear_combination_tensor",
    "diagonal",
    "extend",
    "unextend_inverse",
    "invert_hermitian",
    "lincomb_of_inverses",
    "matfunc_circle",
    "matfunc_general",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub trials: u64,
    pub max_measured_over_claimed: f64,
    pub pass: bool,
}

/// Runs every suite for `trials` seeded trials with at most `max_qubits`
/// simulated qubits per instance.
pub fn cmd_verify(seed: u64, trials: u64, max_qubits: usize) -> std::result::Result<Vec<SuiteSummary>, CliError> {
    if max_qubits > QUBIT_CAP {
        return Err(CliError::Config(format!(
            "max_qubits = {max_qubits} exceeds the simulation cap of {QUBIT_CAP}"
        )));
    }
    if max_qubits < MIN_VERIFY_QUBITS {
        return Err(CliError::Config(format!(
            "max_qubits = {max_qubits} is below the {MIN_VERIFY_QUBITS} qubits the pipeline suites need"
        )));
    }
    if trials == 0 {
        return Err(CliError::Config("trials must be positive".into()));
    }
    SUITES
        .iter()
        .map(|&suite| {
            let ratios = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = rng_for(seed, suite, t);
                    run_trial(suite, &mut rng, max_qubits)
                        .map_err(|e| CliError::Contract(format!("suite {suite}, trial {t}: {e}")))
                })
                .collect::<std::result::Result<Vec<f64>, CliError>>()?;
            let worst = ratios.into_iter().fold(0.0, f64::max);
            Ok(SuiteSummary {
                suite: suite.to_string(),
                trials,
                max_measured_over_claimed: worst,
                pass: worst <= 1.0,
            })
        })
        .collect()
}

fn ratio(measured: f64, claimed: f64) -> f64 {
    measured / (claimed + CONTRACT_SLACK)
}

/// Measured-over-claimed ratio of one random instance of `suite`.
pub fn run_trial(suite: &str, rng: &mut TestRng, max_qubits: usize) -> Result<f64> {
    match suite {
        "product" => product_trial(rng, max_qubits),
        "tensor" => tensor_trial(rng, max_qubits),
        "linear_combination" => lcu_trial(rng, max_qubits),
        "linear_combination_tensor" => lcu_tensor_trial(rng, max_qubits),
        "diagonal" => diagonal_trial(rng),
        "extend" => extend_trial(rng, max_qubits),
        "unextend_inverse" => unextend_trial(rng, max_qubits),
        "invert_hermitian" => invert_trial(rng),
        "lincomb_of_inverses" => lincomb_trial(rng),
        "matfunc_circle" => circle_trial(rng, max_qubits),
        "matfunc_general" => general_trial(rng),
        other => Err(crate::error::Error::InvalidParameter(format!("unknown suite {other}"))),
    }
}

fn alpha(rng: &mut TestRng) -> f64 {
    rng.gen_range(0.5..2.0)
}

/// Draws `(n, a_1, a_2)` until `n + a_1 + a_2 + extra ≤ max_qubits`.
fn sizes(rng: &mut TestRng, n_max: usize, a_max: usize, extra: usize, max_qubits: usize) -> (usize, usize, usize) {
    loop {
        let n = rng.gen_range(1..=n_max);
        let a1 = rng.gen_range(0..=a_max);
        let a2 = rng.gen_range(0..=a_max);
        if n + a1 + a2 + extra <= max_qubits {
            return (n, a1, a2);
        }
    }
}

fn product_trial(rng: &mut TestRng, max_qubits: usize) -> Result<f64> {
    let (n, a1, a2) = sizes(rng, 2, 4, 0, max_qubits);
    let (al, be) = (alpha(rng), alpha(rng));
    let (ea, a) = noisy_encoding(rng, n, a1, al);
    let (eb, b) = noisy_encoding(rng, n, a2, be);
    let out = product(&ea, &eb)?;
    Ok(ratio(out.verify(&a.mul(&b)?)?, out.epsilon()))
}

fn tensor_trial(rng: &mut TestRng, max_qubits: usize) -> Result<f64> {
    let (na, a1, a2) = sizes(rng, 2, 3, 2, max_qubits);
    let nb = rng.gen_range(1..=2);
    let (al, be) = (alpha(rng), alpha(rng));
    let (ea, a) = noisy_encoding(rng, na, a1, al);
    let (eb, b) = noisy_encoding(rng, nb, a2, be);
    let out = tensor(&ea, &eb)?;
    Ok(ratio(out.verify(&a.kron(&b))?, out.epsilon()))
}

fn lcu_trial(rng: &mut TestRng, max_qubits: usize) -> Result<f64> {
    let k = rng.gen_range(1..=4);
    let m = index_qubits(k);
    let n = rng.gen_range(1..=2);
    let a_cap = 4.min(max_qubits - m - n);
    let mut bes = Vec::with_capacity(k);
    let mut target = CMatrix::zeros(1 << n, 1 << n);
    let y = random_coefficients(rng, k);
    for yj in &y.0 {
        let a = rng.gen_range(0..=a_cap);
        let al = alpha(rng);
        let (be, t) = noisy_encoding(rng, n, a, al);
        target.axpy(*yj, &t)?;
        bes.push(be);
    }
    let coeffs = CVector(bes.iter().zip(&y.0).map(|(be, yj)| yj * be.alpha()).collect());
    let pair = build_sqrt_pair(&coeffs, m)?;
    let out = linear_combination(&bes, &y, &pair)?;
    Ok(ratio(out.verify(&target)?, out.epsilon()))
}

fn lcu_tensor_trial(rng: &mut TestRng, max_qubits: usize) -> Result<f64> {
    let k = rng.gen_range(1..=3);
    let c = index_qubits(k);
    let (na, nb) = (1, 1);
    let a_cap = 2.min((max_qubits - c - na - nb) / 2);
    let y = random_coefficients(rng, k);
    let (mut list_a, mut list_b) = (Vec::new(), Vec::new());
    let mut target = CMatrix::zeros(1 << (na + nb), 1 << (na + nb));
    for yj in &y.0 {
        let (a1, a2) = (rng.gen_range(0..=a_cap), rng.gen_range(0..=a_cap));
        let (al, be) = (alpha(rng), alpha(rng));
        let (ea, a) = noisy_encoding(rng, na, a1, al);
        let (eb, b) = noisy_encoding(rng, nb, a2, be);
        target.axpy(*yj, &a.kron(&b))?;
        list_a.push(ea);
        list_b.push(eb);
    }
    let coeffs = CVector(
        list_a
            .iter()
            .zip(&list_b)
            .zip(&y.0)
            .map(|((ea, eb), yj)| yj * ea.alpha() * eb.alpha())
            .collect(),
    );
    let pair = build_sqrt_pair(&coeffs, c)?;
    let out = linear_combination_tensor(&list_a, &list_b, &y, &pair)?;
    Ok(ratio(out.verify(&target)?, out.epsilon()))
}

fn diagonal_trial(rng: &mut TestRng) -> Result<f64> {
    let n = rng.gen_range(1..=3);
    let d = random_coefficients(rng, 1 << n);
    let out = diagonal(&d)?;
    Ok(ratio(out.verify(&CMatrix::diag(&d.0))?, out.epsilon()))
}

fn extend_trial(rng: &mut TestRng, max_qubits: usize) -> Result<f64> {
    let (n, a, _) = sizes(rng, 2, 4, 1, max_qubits);
    let al = alpha(rng);
    let (be, t) = noisy_encoding(rng, n, a, al);
    let out = extend(&be)?;
    Ok(ratio(out.verify(&hermitian_extension(&t))?, out.epsilon()))
}

/// Encoding of `target + E` at normalization `‖target‖/ρ` with `‖E‖` claimed.
fn perturbed_encoding(rng: &mut TestRng, target: &CMatrix, a: usize, noise_scale: f64) -> Result<BlockEncoding> {
    let n = crate::linalg::qubits_of(target.rows())?;
    let alpha = spectral_norm(target) / rng.gen_range(0.5..0.95);
    let noise_norm = alpha * rng.gen_range(0.0..noise_scale);
    let noise = random_with_norm(rng, target.rows(), noise_norm);
    let eps = spectral_norm(&noise);
    let u = dilate_to_unitary(&target.add(&noise)?.scale_real(1.0 / alpha))?;
    BlockEncoding::new(u, n, 1, alpha, eps)?.embed(a.max(1) - 1)
}

fn unextend_trial(rng: &mut TestRng, max_qubits: usize) -> Result<f64> {
    let (n, a, _) = sizes(rng, 2, 3, 1, max_qubits);
    let norm = rng.gen_range(0.2..1.5);
    let a_inv = random_with_norm(rng, 1 << n, norm);
    let be = perturbed_encoding(rng, &extension_inverse(&a_inv), a.max(1), 0.05)?;
    let out = unextend_inverse(&be)?;
    Ok(ratio(out.verify(&a_inv)?, out.epsilon()))
}

fn invert_trial(rng: &mut TestRng) -> Result<f64> {
    let n = rng.gen_range(1..=2);
    let beta = [1.0, 2.0, 4.0][rng.gen_range(0..3)];
    let alpha = rng.gen_range(1.2..2.0);
    let delta = [1e-2, 1e-3][rng.gen_range(0..2)];
    let spectrum: Vec<f64> = (0..1usize << n)
        .map(|_| {
            let mag = rng.gen_range(1.05 / beta..0.95 * alpha);
            if rng.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        })
        .collect();
    let h = hermitian_with_spectrum(rng, &spectrum);
    let noise_norm = alpha * rng.gen_range(0.0..1e-4);
    let noise = random_hermitian(rng, 1 << n);
    let noise = noise.scale_real(noise_norm / spectral_norm(&noise));
    let u = dilate_to_unitary(&h.add(&noise)?.scale_real(1.0 / alpha))?;
    let be = BlockEncoding::new(u, n, 1, alpha, spectral_norm(&noise))?;
    let (out, _) = invert_hermitian(&be, beta, delta)?;
    Ok(ratio(out.verify(&h.inverse()?)?, out.epsilon()))
}

/// `V diag(s) W` with singular values drawn from `[lo, hi]`.
fn with_singular_values(rng: &mut TestRng, dim: usize, lo: f64, hi: f64) -> Result<CMatrix> {
    let s: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen_range(lo..hi), 0.0)).collect();
    let (v, w) = (random_unitary(rng, dim), random_unitary(rng, dim));
    CMatrix::mul_chain(&[&v, &CMatrix::diag(&s), &w])
}

fn lincomb_trial(rng: &mut TestRng) -> Result<f64> {
    let blocks = [with_singular_values(rng, 2, 0.3, 1.0)?, with_singular_values(rng, 2, 0.3, 1.0)?];
    let big = CMatrix::block_diag(&blocks);
    let be = perturbed_encoding(rng, &big, 1, 1e-4)?;
    let w = random_coefficients(rng, 2);
    let r = rng.gen_range(0.5..2.0);
    let pair = build_sqrt_pair(&w, 1)?;
    let beta = 1.0 / (0.3 - 2.0 * be.epsilon());
    let (out, report) = lincomb_of_inverses(&be, &pair, &w, beta, r, 1e-3)?;
    let mut target = CMatrix::zeros(2, 2);
    for (k, block) in blocks.iter().enumerate() {
        target.axpy(w[k] * r, &block.inverse()?)?;
    }
    Ok(ratio(out.verify(&target)?, out.epsilon()).max(ratio(report.measured_error_vs_fm, report.eta)))
}

fn circle_trial(rng: &mut TestRng, max_qubits: usize) -> Result<f64> {
    let norm = rng.gen_range(0.05..0.5);
    let small = random_with_norm(rng, 2, norm);
    let (f, a, z0, r, big_r) = match rng.gen_range(0..4) {
        0 => (ScalarFunction::Exp, small, 0.0, 1.0, 2.0),
        1 => (ScalarFunction::Log, small.add(&CMatrix::identity(2).scale_real(1.5))?, 1.5, 1.0, 1.4),
        2 => (ScalarFunction::InvSqrt, small.add(&CMatrix::identity(2).scale_real(1.5))?, 1.5, 1.0, 1.4),
        _ => {
            let coefficients: Vec<C64> = (0..4).map(|_| gaussian(rng)).collect();
            (ScalarFunction::Polynomial { center: C64::new(0.0, 0.0), coefficients }, small, 0.0, 1.0, 2.0)
        }
    };
    let points = if max_qubits >= 9 && rng.gen_bool(0.5) { 4 } else { 2 };
    let taylor_terms = rng.gen_range(4..=16);
    let c = CircleContour::new(C64::new(z0, 0.0), r, big_r, points, taylor_terms)?;
    let norm = spectral_norm(&a);
    let be = super::encode_matrix(&a, Some(norm * rng.gen_range(1.0..1.5)))
        .map_err(|e| crate::error::Error::InvalidParameter(e.to_string()))?;
    let (_, report) = build_fM_encoding(&be, &f, &c, 1e-3)?;
    let vs_f = report.measured_error_vs_f.unwrap_or(0.0);
    let eps_m = report.eps_m.unwrap_or(0.0);
    Ok(ratio(report.measured_error_vs_fm, report.eta).max(ratio(vs_f, report.eta + eps_m)))
}

fn general_trial(rng: &mut TestRng) -> Result<f64> {
    let norm = rng.gen_range(0.05..0.5);
    let a = random_with_norm(rng, 2, norm);
    let unit = |rng: &mut TestRng| {
        let g = gaussian(rng);
        g / g.norm()
    };
    let y = CVector((0..2).map(|_| unit(rng) * rng.gen_range(1.0..2.0)).collect());
    let z = CVector((0..2).map(|_| unit(rng) * rng.gen_range(0.0..1.0)).collect());
    let w = random_coefficients(rng, 2);
    let q = QuadratureScheme::new(w.clone(), y, z, rng.gen_range(0.5..2.0))?;
    let be = super::encode_matrix(&a, None).map_err(|e| crate::error::Error::InvalidParameter(e.to_string()))?;
    let beta_prime = super::inverse_bound(&be.encoded_block(), &q)
        .map_err(|e| crate::error::Error::InvalidParameter(e.to_string()))?
        * rng.gen_range(1.0..1.5);
    let pair = build_sqrt_pair(&w, 1)?;
    let (out, report) = build_FM_encoding(&be, &q, &pair, beta_prime, 1e-3)?;
    let dense = crate::matfunc::general_dense(&a, &q)?;
    Ok(ratio(out.verify(&dense)?, out.epsilon()).max(ratio(report.measured_error_vs_fm, report.eta)))
}
