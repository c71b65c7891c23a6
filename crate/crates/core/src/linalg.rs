//! Dense complex linear algebra.
//!
//! Everything in the crate is carried by [`CMatrix`], a row-major dense
//! complex matrix. Products skip structural zeros, so permutations, selector
//! projectors and `I ⊗ U` factors multiply in roughly `O(nnz)` time, which is
//! what keeps 10-qubit block-encodings cheap to assemble.
//!
//! The Hermitian eigen-solver is a cyclic complex Jacobi iteration; spectral
//! norms of general matrices come from the largest eigenvalue of `A†A`.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Absolute tolerance for "is unitary" / "is Hermitian" checks on operators of norm ~1.
pub const OPERATOR_TOL: f64 = 1e-9;

/// Eigenvalues of `I − BB†` in `[−PSD_CLAMP, 0)` are rounded up to zero.
pub const PSD_CLAMP: f64 = 1e-12;

// Below this many multiply-adds a product stays on the calling thread.
const PARALLEL_WORK: usize = 1 << 18;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(16) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(16) {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl CMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(
                "CMatrix::new",
                rows * cols,
                format!("{} entries", data.len()),
            ));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    /// Real-valued convenience constructor. Panics on ragged input.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let nested: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&nested)
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Block-diagonal matrix `diag(B_0, B_1, ...)`.
    pub fn block_diag(blocks: &[CMatrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            m.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Matrix product. Zero entries of either factor are skipped.
    pub fn mul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::dims(
                "mul",
                format!("{} rows on the right", self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let (n, p) = (self.rows, other.cols);
        let mut out = vec![ZERO; n * p];
        if n == 0 || p == 0 {
            return Ok(CMatrix {
                rows: n,
                cols: p,
                data: out,
            });
        }

        let nnz_other = other.data.iter().filter(|z| **z != ZERO).count();
        let sparse_rows: Option<Vec<Vec<(usize, C64)>>> =
            if nnz_other * 4 < other.data.len() {
                Some(
                    (0..other.rows)
                        .map(|k| {
                            other
                                .row(k)
                                .iter()
                                .enumerate()
                                .filter(|(_, z)| **z != ZERO)
                                .map(|(j, z)| (j, *z))
                                .collect()
                        })
                        .collect(),
                )
            } else {
                None
            };

        let row_kernel = |(i, out_row): (usize, &mut [C64])| {
            let a_row = self.row(i);
            for (k, &a) in a_row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                match &sparse_rows {
                    Some(rows) => {
                        for &(j, b) in &rows[k] {
                            out_row[j] += a * b;
                        }
                    }
                    None => {
                        for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                            *o += a * b;
                        }
                    }
                }
            }
        };

        let work = n * self.cols * if sparse_rows.is_some() { 1 } else { p };
        if work >= PARALLEL_WORK {
            out.par_chunks_mut(p).enumerate().for_each(row_kernel);
        } else {
            out.chunks_mut(p).enumerate().for_each(row_kernel);
        }
        Ok(CMatrix {
            rows: n,
            cols: p,
            data: out,
        })
    }

    /// Product of a chain of matrices, left to right.
    pub fn mul_chain(factors: &[&CMatrix]) -> Result<CMatrix> {
        let (first, rest) = factors
            .split_first()
            .ok_or_else(|| Error::InvalidParameter("empty product".into()))?;
        rest.iter().try_fold((*first).clone(), |acc, m| acc.mul(m))
    }

    pub fn mul_vec(&self, v: &CVector) -> Result<CVector> {
        if self.cols != v.dim() {
            return Err(Error::dims("mul_vec", self.cols, v.dim()));
        }
        Ok(CVector(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(&v.0).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    /// Kronecker product with the `a[i][j]·b` block convention.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    let dst = (i * other.rows + k) * cols + j * other.cols;
                    for (d, &b) in m.data[dst..dst + other.cols].iter_mut().zip(other.row(k)) {
                        *d = a * b;
                    }
                }
            }
        }
        m
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, c: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> CMatrix {
        self.scale(C64::new(c, 0.0))
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &CMatrix,
        op: &'static str,
        f: impl Fn(C64, C64) -> C64,
    ) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims(
                op,
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self += c·other` in place.
    pub fn axpy(&mut self, c: C64, other: &CMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims(
                "axpy",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Copies the `rows × cols` block starting at `(r0, c0)`.
    pub fn sub_block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        CMatrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &CMatrix) {
        assert!(
            r0 + block.rows <= self.rows && c0 + block.cols <= self.cols,
            "block out of range"
        );
        for i in 0..block.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(i));
        }
    }

    /// `‖H − H†‖_F`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr() * if i == j { 1.0 } else { 2.0 };
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `‖U†U − I‖_F`, an upper bound on the spectral deviation.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = self
            .adjoint()
            .mul(self)
            .expect("square matrix multiplies with its adjoint");
        let mut acc = 0.0;
        for i in 0..gram.rows {
            for j in 0..gram.cols {
                let target = if i == j { ONE } else { ZERO };
                acc += (gram[(i, j)] - target).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Inverse by Gaussian elimination with partial pivoting.
    pub fn inverse(&self) -> Result<CMatrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "inverse",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .expect("nonempty pivot range");
            if a[(pivot, col)].norm() <= 1e-14 * scale {
                return Err(Error::Singular(format!("zero pivot in column {col}")));
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(r, j)] -= factor * ac;
                    inv[(r, j)] -= factor * ic;
                }
            }
        }
        Ok(inv)
    }
}

/// Dense complex vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CVector(pub Vec<C64>);

impl CVector {
    pub fn new(entries: Vec<C64>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![ZERO; dim])
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = ONE;
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn kron(&self, other: &CVector) -> CVector {
        CVector(
            self.0
                .iter()
                .flat_map(|a| other.0.iter().map(move |b| a * b))
                .collect(),
        )
    }

    /// Column matrix `|v⟩`.
    pub fn as_column(&self) -> CMatrix {
        CMatrix {
            rows: self.dim(),
            cols: 1,
            data: self.0.clone(),
        }
    }

    pub fn padded(&self, dim: usize) -> CVector {
        let mut v = self.0.clone();
        v.resize(dim, ZERO);
        CVector(v)
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V·diag(g(λ))·V†`.
    pub fn map(&self, g: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.values.len();
        let weights: Vec<C64> = self.values.iter().map(|&l| g(l)).collect();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for (k, w) in weights.iter().enumerate() {
                    acc += self.vectors[(i, k)] * w * self.vectors[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// Cyclic complex Jacobi eigen-solver for Hermitian matrices.
pub fn eig_hermitian(h: &CMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            op: "eig_hermitian",
            rows: h.rows,
            cols: h.cols,
        });
    }
    let deviation = h.hermitian_deviation();
    if deviation > 1e-10 * h.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let n = h.rows;
    // symmetrize so rounding in the input cannot bias the rotations
    let mut a = CMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);
    let total = a.frobenius_norm();
    let tol = f64::EPSILON * total.max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= tol * 1e-3 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) · [[c, s], [−s, c]]
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Largest singular value, via the top eigenvalue of `A†A`.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.rows == 0 || a.cols == 0 {
        return 0.0;
    }
    // work with the smaller Gram matrix
    let gram = if a.rows < a.cols {
        a.mul(&a.adjoint())
    } else {
        a.adjoint().mul(a)
    }
    .expect("Gram product dimensions agree");
    let eig = eig_hermitian(&gram).expect("Gram matrix is Hermitian");
    eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Smallest singular value of a square matrix.
pub fn min_singular_value(a: &CMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            op: "min_singular_value",
            rows: a.rows,
            cols: a.cols,
        });
    }
    let gram = a.adjoint().mul(a)?;
    let eig = eig_hermitian(&gram)?;
    Ok(eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Principal square root of a Hermitian PSD matrix.
pub fn sqrt_psd(h: &CMatrix) -> Result<CMatrix> {
    let eig = eig_hermitian(h)?;
    if let Some(&low) = eig.values.first() {
        if low < -PSD_CLAMP {
            return Err(Error::NegativeEigenvalue { value: low });
        }
    }
    Ok(eig.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)))
}

/// Halmos dilation `[[B, √(I−BB†)], [√(I−B†B), −B†]]` of a contraction `B`.
///
/// The top-left block is `B` itself, copied verbatim. Both defect blocks come
/// from one eigendecomposition `B†B = WΛW†`:
///
/// ```text
/// √(I−B†B) = W √(1−Λ) W†,    √(I−BB†) = I − B W g(Λ) W† B†,   g(λ) = 1/(1 + √(1−λ)).
/// ```
///
/// Two independent square roots would each carry an `O(√ε_mach)` error near
/// `‖B‖ = 1`; with a shared `W` the intertwining `B√(I−B†B) = √(I−BB†)B` and
/// the unitarity of the result hold to rounding.
pub fn dilate_to_unitary(b: &CMatrix) -> Result<CMatrix> {
    if !b.is_square() {
        return Err(Error::NotSquare {
            op: "dilate_to_unitary",
            rows: b.rows,
            cols: b.cols,
        });
    }
    let norm = spectral_norm(b);
    if norm > 1.0 + 1e-10 {
        return Err(Error::NormTooLarge { norm });
    }
    let n = b.rows;
    let bd = b.adjoint();
    let gram = bd.mul(b)?;
    let eig = eig_hermitian(&hermitize(&gram))?;
    let defect = |l: f64| (1.0 - l).max(0.0).sqrt();
    let lower = eig.map(|l| C64::new(defect(l), 0.0));
    let g = eig.map(|l| C64::new(1.0 / (1.0 + defect(l)), 0.0));
    let upper = CMatrix::identity(n).sub(&CMatrix::mul_chain(&[b, &g, &bd])?)?;

    let mut u = CMatrix::zeros(2 * n, 2 * n);
    u.set_block(0, 0, b);
    u.set_block(0, n, &upper);
    u.set_block(n, 0, &lower);
    u.set_block(n, n, &bd.scale(-ONE));
    Ok(u)
}

fn hermitize(h: &CMatrix) -> CMatrix {
    CMatrix::from_fn(h.rows, h.cols, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5)
}

/// Householder completion: a unitary whose first column is `v`.
pub fn complete_to_unitary(v: &CVector) -> Result<CMatrix> {
    let norm = v.norm2();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    let n = v.dim();
    if n == 0 {
        return Err(Error::ZeroVector);
    }
    let v0 = v[0];
    let phase = if v0.norm() > 0.0 { v0 / v0.norm() } else { ONE };
    // v' = conj(phase)·v has a real nonnegative leading entry
    let rotated: Vec<C64> = v.0.iter().map(|z| z * phase.conj()).collect();
    let mut w: Vec<C64> = rotated.iter().map(|z| -z).collect();
    w[0] += ONE;
    let wnorm2: f64 = w.iter().map(|z| z.norm_sqr()).sum();

    let mut q = CMatrix::identity(n);
    if wnorm2 > 1e-30 {
        for i in 0..n {
            for j in 0..n {
                q[(i, j)] -= w[i] * w[j].conj() * (2.0 / wnorm2);
            }
        }
    }
    Ok(q.scale(phase))
}

/// `2^k`, checking that `dim` is a power of two.
pub fn qubits_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_matrix, rng};

    fn pauli_x() -> CMatrix {
        CMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    fn naive_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
        CMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            let mut acc = ZERO;
            for k in 0..a.cols() {
                acc += a[(i, k)] * b[(k, j)];
            }
            acc
        })
    }

    #[test]
    fn mul_identity_and_paulis() {
        let id = CMatrix::identity(2);
        assert_eq!(id.mul(&id).unwrap(), id);
        let xz = pauli_x().mul(&pauli_z()).unwrap();
        assert_eq!(xz, CMatrix::from_real(&[&[0.0, -1.0], &[1.0, 0.0]]));
    }

    #[test]
    fn mul_matches_triple_loop() {
        let mut r = rng(1);
        let a = random_matrix(&mut r, 3, 3);
        let b = random_matrix(&mut r, 3, 3);
        assert!(a.mul(&b).unwrap().max_abs_diff(&naive_mul(&a, &b)).unwrap() < 1e-13);
    }

    #[test]
    fn mul_sparse_path_matches_dense() {
        let mut r = rng(2);
        let a = random_matrix(&mut r, 16, 16);
        let perm = CMatrix::from_fn(16, 16, |i, j| if j == (i * 5 + 3) % 16 { ONE } else { ZERO });
        let fast = a.mul(&perm).unwrap();
        assert!(fast.max_abs_diff(&naive_mul(&a, &perm)).unwrap() < 1e-15);
    }

    #[test]
    fn mul_rejects_mismatch() {
        assert!(matches!(
            CMatrix::zeros(2, 3).mul(&CMatrix::zeros(2, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kron_block_conventions() {
        let id = CMatrix::identity(2);
        let x = pauli_x();
        let ix = id.kron(&x);
        assert_eq!(ix, CMatrix::block_diag(&[x.clone(), x.clone()]));
        let xi = x.kron(&id);
        assert_eq!(xi.sub_block(0, 2, 2, 2), id);
        assert_eq!(xi.sub_block(2, 0, 2, 2), id);
        assert_eq!(xi.sub_block(0, 0, 2, 2), CMatrix::zeros(2, 2));
    }

    #[test]
    fn kron_mixed_product() {
        let mut r = rng(3);
        let (a, b, c, d) = (
            random_matrix(&mut r, 2, 2),
            random_matrix(&mut r, 2, 2),
            random_matrix(&mut r, 2, 2),
            random_matrix(&mut r, 2, 2),
        );
        let lhs = a.kron(&b).mul(&c.kron(&d)).unwrap();
        let rhs = a.mul(&c).unwrap().kron(&b.mul(&d).unwrap());
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-13);
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(CMatrix::identity(3).adjoint(), CMatrix::identity(3));
        let n = CMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(n.adjoint(), CMatrix::from_real(&[&[0.0, 0.0], &[1.0, 0.0]]));
        let a = random_matrix(&mut rng(4), 3, 5);
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((spectral_norm(&CMatrix::identity(4)) - 1.0).abs() < 1e-12);
        let d = CMatrix::diag(&[C64::new(3.0, 0.0), C64::new(0.0, -4.0)]);
        assert!((spectral_norm(&d) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_matches_power_iteration() {
        let a = random_matrix(&mut rng(5), 4, 4);
        let gram = a.adjoint().mul(&a).unwrap();
        let mut v = CVector::from_real(&[1.0, 0.3, -0.2, 0.5]);
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let w = gram.mul_vec(&v).unwrap();
            lambda = w.norm2() / v.norm2();
            let n = w.norm2();
            v = CVector(w.0.iter().map(|z| z / n).collect());
        }
        assert!((spectral_norm(&a) - lambda.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn eig_examples() {
        let d = CMatrix::from_real(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]);
        let e = eig_hermitian(&d).unwrap();
        for (got, want) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let e = eig_hermitian(&pauli_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let h = random_hermitian(&mut rng(6), 6);
        let e = eig_hermitian(&h).unwrap();
        let rebuilt = e.map(|l| C64::new(l, 0.0));
        assert!(spectral_norm(&rebuilt.sub(&h).unwrap()) <= 1e-9 * spectral_norm(&h));
        assert!(e.vectors.is_unitary(1e-10));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let n = CMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(eig_hermitian(&n), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_psd_examples() {
        assert!(sqrt_psd(&CMatrix::identity(3)).unwrap().max_abs_diff(&CMatrix::identity(3)).unwrap() < 1e-14);
        let s = sqrt_psd(&CMatrix::from_real(&[&[4.0, 0.0], &[0.0, 9.0]])).unwrap();
        assert!(s.max_abs_diff(&CMatrix::from_real(&[&[2.0, 0.0], &[0.0, 3.0]])).unwrap() < 1e-14);
        let b = random_matrix(&mut rng(7), 5, 5);
        let psd = b.adjoint().mul(&b).unwrap();
        let s = sqrt_psd(&psd).unwrap();
        assert!(s.mul(&s).unwrap().max_abs_diff(&psd).unwrap() < 1e-9);
        assert!(matches!(
            sqrt_psd(&CMatrix::from_real(&[&[-1.0, 0.0], &[0.0, 1.0]])),
            Err(Error::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn dilation_examples() {
        let id = CMatrix::identity(2);
        let zero = CMatrix::zeros(2, 2);
        let u0 = dilate_to_unitary(&zero).unwrap();
        assert!(u0.max_abs_diff(&pauli_x().kron(&id)).unwrap() < 1e-14);
        let u1 = dilate_to_unitary(&id).unwrap();
        assert!(u1.max_abs_diff(&pauli_z().kron(&id)).unwrap() < 1e-14);
        let half = id.scale_real(0.5);
        let uh = dilate_to_unitary(&half).unwrap();
        assert_eq!(uh.sub_block(0, 0, 2, 2), half);
        assert!(uh.is_unitary(1e-10));
        assert!(matches!(
            dilate_to_unitary(&id.scale_real(1.5)),
            Err(Error::NormTooLarge { .. })
        ));
    }

    #[test]
    fn dilation_near_unit_norm_stays_unitary() {
        let mut r = rng(17);
        for dim in [2, 4, 8] {
            for _ in 0..10 {
                let g = random_matrix(&mut r, dim, dim);
                let b = g.scale_real(1.0 / spectral_norm(&g));
                let u = dilate_to_unitary(&b).unwrap();
                assert!(u.unitarity_deviation() < 1e-12, "{}", u.unitarity_deviation());
            }
        }
    }

    #[test]
    fn completion_examples() {
        assert!(complete_to_unitary(&CVector::basis(4, 0)).unwrap().max_abs_diff(&CMatrix::identity(4)).unwrap() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = complete_to_unitary(&CVector::from_real(&[s, s])).unwrap();
        assert!(u.is_unitary(1e-12));
        assert!((u[(0, 0)].re - s).abs() < 1e-15 && (u[(1, 0)].re - s).abs() < 1e-15);
        assert!(matches!(
            complete_to_unitary(&CVector::from_real(&[1.0, 1.0])),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn inverse_matches_identity() {
        let a = random_matrix(&mut rng(9), 5, 5);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).unwrap().max_abs_diff(&CMatrix::identity(5)).unwrap() < 1e-12);
        assert!(matches!(CMatrix::zeros(2, 2).inverse(), Err(Error::Singular(_))));
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(CMatrix::new(2, 2, vec![ZERO; 3]).is_err());
        assert!(matches!(
            CMatrix::new(1, 1, vec![C64::new(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        ));
    }
}
