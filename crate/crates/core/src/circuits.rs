//! Registers, elementary gates and qubit permutations as explicit matrices.
//!
//! Qubits are indexed big-endian: qubit 1 (or position 0 in the 0-based
//! helpers) is the most significant bit of the basis index.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ONE, ZERO};

/// Largest register the simulator will build a dense unitary for.
pub const QUBIT_CAP: usize = 14;

/// Named registers in most-significant-first order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<(String, usize)>,
}

impl RegisterLayout {
    pub fn new<S: Into<String>>(registers: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let registers: Vec<(String, usize)> =
            registers.into_iter().map(|(l, q)| (l.into(), q)).collect();
        for (i, (label, _)) in registers.iter().enumerate() {
            if registers[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::Layout(format!("duplicate register label {label:?}")));
            }
        }
        let layout = Self { registers };
        check_cap(layout.total())?;
        Ok(layout)
    }

    pub fn total(&self) -> usize {
        self.registers.iter().map(|(_, q)| q).sum()
    }

    pub fn dim(&self) -> usize {
        1 << self.total()
    }

    pub fn size(&self, label: &str) -> Option<usize> {
        self.registers.iter().find(|(l, _)| l == label).map(|(_, q)| *q)
    }

    /// Position of the register's first qubit.
    pub fn offset(&self, label: &str) -> Option<usize> {
        let mut off = 0;
        for (l, q) in &self.registers {
            if l == label {
                return Some(off);
            }
            off += q;
        }
        None
    }

    pub fn registers(&self) -> &[(String, usize)] {
        &self.registers
    }
}

pub fn check_cap(qubits: usize) -> Result<()> {
    if qubits > QUBIT_CAP {
        Err(Error::CapExceeded {
            qubits,
            cap: QUBIT_CAP,
        })
    } else {
        Ok(())
    }
}

/// `|j⟩⟨j|` on `m` qubits.
pub fn projector(j: usize, m: usize) -> Result<CMatrix> {
    check_cap(m)?;
    let dim = 1usize << m;
    if j >= dim {
        return Err(Error::IndexOutOfRange { index: j, limit: dim });
    }
    let mut p = CMatrix::zeros(dim, dim);
    p[(j, j)] = ONE;
    Ok(p)
}

/// Permutation matrix that sends the qubit at position `i` to position `dest[i]`.
pub fn permute_qubits(dest: &[usize]) -> Result<CMatrix> {
    let total = dest.len();
    check_cap(total)?;
    let mut seen = vec![false; total];
    for &d in dest {
        if d >= total || std::mem::replace(&mut seen[d], true) {
            return Err(Error::InvalidParameter(format!(
                "{dest:?} is not a permutation of 0..{total}"
            )));
        }
    }
    let dim = 1usize << total;
    let mut p = CMatrix::zeros(dim, dim);
    for x in 0..dim {
        let mut y = 0usize;
        for (i, &d) in dest.iter().enumerate() {
            let bit = (x >> (total - 1 - i)) & 1;
            y |= bit << (total - 1 - d);
        }
        p[(y, x)] = ONE;
    }
    Ok(p)
}

/// Exchanges qubits `i` and `j` (1-based) of a `total`-qubit register.
pub fn swap_pair(i: usize, j: usize, total: usize) -> Result<CMatrix> {
    for q in [i, j] {
        if q == 0 || q > total {
            return Err(Error::IndexOutOfRange {
                index: q,
                limit: total,
            });
        }
    }
    let mut dest: Vec<usize> = (0..total).collect();
    dest.swap(i - 1, j - 1);
    permute_qubits(&dest)
}

/// Moves the leading `a` qubits behind the following `b` qubits.
///
/// `SWAP_{a,b}(|0^a⟩ ⊗ x) = x ⊗ |0^a⟩` for every `b`-qubit state `x`; qubits
/// beyond `a + b` are untouched.
pub fn swap_block(a: usize, b: usize, total: usize) -> Result<CMatrix> {
    if a + b > total {
        return Err(Error::InvalidParameter(format!(
            "swap_block({a}, {b}) needs {} qubits, register has {total}",
            a + b
        )));
    }
    let dest: Vec<usize> = (0..total)
        .map(|i| {
            if i < a {
                b + i
            } else if i < a + b {
                i - a
            } else {
                i
            }
        })
        .collect();
    permute_qubits(&dest)
}

/// `R_y(φ) = exp(i(φ/2)σ_y)`.
pub fn rotation_y(phi: f64) -> CMatrix {
    let (s, c) = (phi / 2.0).sin_cos();
    CMatrix::from_real(&[&[c, s], &[-s, c]])
}

/// `R_z(φ) = exp(i(φ/2)σ_z)`.
pub fn rotation_z(phi: f64) -> CMatrix {
    CMatrix::diag(&[
        C64::from_polar(1.0, phi / 2.0),
        C64::from_polar(1.0, -phi / 2.0),
    ])
}

/// `diag(1, e^{2πi/2^{j+1}})`, the phase gate on qubit `j` of the node register.
pub fn phase_gate(j: usize) -> CMatrix {
    CMatrix::diag(&[ONE, C64::from_polar(1.0, 2.0 * PI / (1u64 << (j + 1)) as f64)])
}

/// `diag(e^{iθ_k})` with `θ_k = 2πk/2^m`, assembled as `R_0 ⊗ ⋯ ⊗ R_{m−1}`.
#[allow(non_snake_case)]
pub fn phase_R_gates(m: usize) -> Result<CMatrix> {
    if m == 0 {
        return Err(Error::InvalidParameter("phase register needs m ≥ 1".into()));
    }
    check_cap(m)?;
    Ok((1..m).fold(phase_gate(0), |acc, j| acc.kron(&phase_gate(j))))
}

/// Applies `u` on the target register when the selector qubits read
/// `pattern` (a string of '0'/'1', most significant first) and acts as the
/// identity otherwise. Selector qubits come first.
pub fn controlled(pattern: &str, u: &CMatrix) -> Result<CMatrix> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            op: "controlled",
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let m = pattern.len();
    let selected = usize::from_str_radix(pattern, 2)
        .ok()
        .filter(|_| pattern.chars().all(|ch| ch == '0' || ch == '1'))
        .ok_or_else(|| Error::InvalidParameter(format!("bad selector pattern {pattern:?}")))?;
    check_cap(m + crate::linalg::qubits_of(u.rows())?)?;
    let id = CMatrix::identity(u.rows());
    let blocks: Vec<CMatrix> = (0..1usize << m)
        .map(|s| if s == selected { u.clone() } else { id.clone() })
        .collect();
    Ok(CMatrix::block_diag(&blocks))
}

/// `Σ_j |j⟩⟨j| ⊗ U_j` on an `m`-qubit selector; indices past the list get the identity.
pub fn multiplexer(m: usize, unitaries: &[CMatrix]) -> Result<CMatrix> {
    let first = unitaries
        .first()
        .ok_or_else(|| Error::InvalidParameter("multiplexer needs at least one operator".into()))?;
    let dim = first.rows();
    if unitaries.len() > 1 << m {
        return Err(Error::dims(
            "multiplexer",
            format!("at most {} operators", 1 << m),
            unitaries.len(),
        ));
    }
    for u in unitaries {
        if u.rows() != dim || u.cols() != dim {
            return Err(Error::dims(
                "multiplexer",
                format!("{dim}x{dim}"),
                format!("{}x{}", u.rows(), u.cols()),
            ));
        }
    }
    check_cap(m + crate::linalg::qubits_of(dim)?)?;
    let id = CMatrix::identity(dim);
    let blocks: Vec<CMatrix> = (0..1usize << m)
        .map(|j| unitaries.get(j).cloned().unwrap_or_else(|| id.clone()))
        .collect();
    Ok(CMatrix::block_diag(&blocks))
}

/// `|0^k⟩` as a `2^k × 1` column.
pub fn zero_ket(k: usize) -> CMatrix {
    let mut v = CMatrix::zeros(1 << k, 1);
    v[(0, 0)] = ONE;
    v
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::diag(&[ONE, -ONE])
}
