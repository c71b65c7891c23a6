use thiserror::Error;

/// Errors raised while building or checking block-encodings.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },
    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix is not Hermitian (‖H − H†‖ = {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (‖U†U − I‖_F = {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("vector is not normalized (‖v‖₂ = {norm})")]
    NotNormalized { norm: f64 },
    #[error("matrix norm {norm} exceeds 1; cannot dilate to a unitary")]
    NormTooLarge { norm: f64 },
    #[error("matrix has eigenvalue {value:.3e} below the PSD tolerance")]
    NegativeEigenvalue { value: f64 },
    #[error("non-finite entry encountered")]
    NonFinite,
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("{qubits} qubits exceeds the simulation cap of {cap}")]
    CapExceeded { qubits: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("zero vector supplied where a nonzero vector is required")]
    ZeroVector,
    #[error("matrix is singular: {0}")]
    Singular(String),
    #[error("contour does not enclose the spectrum: ‖A − z0·I‖ = {norm_shift} ≥ r = {r}")]
    SpectrumNotEnclosed { norm_shift: f64, r: f64 },
    #[error("disk |z − z0| ≤ {radius} around z0 = {z0} meets the branch cut (−∞, 0] of {function}")]
    BranchCut {
        function: &'static str,
        z0: String,
        radius: f64,
    },
    #[error("eigenvalue {value:.6e} lies inside the excluded gap (−{bound:.6e}, {bound:.6e}) or above α")]
    EigenvalueOutOfRange { value: f64, bound: f64 },
    #[error("state-preparation pair does not match the coefficients (measured δ = {measured:.3e}, claimed {claimed:.3e})")]
    PairMismatch { measured: f64, claimed: f64 },
    #[error("register layout: {0}")]
    Layout(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(op: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch {
            op,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
