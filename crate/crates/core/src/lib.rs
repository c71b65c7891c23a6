//! Dense simulation and contract checking for block-encodings of matrix
//! functions assembled from linear combinations of matrix inverses.
//!
//! Everything is an explicit complex matrix. A [`BlockEncoding`] carries its
//! full unitary together with the `(α, a, ε)` it claims, so every combinator
//! output can be measured against the matrix it is supposed to encode.

pub mod blockenc;
pub mod circuits;
pub mod cli;
pub mod combinators;
pub mod error;
pub mod inversion;
pub mod linalg;
pub mod matfunc;
pub mod random;
pub mod report;
pub mod stateprep;

pub use blockenc::BlockEncoding;
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use matfunc::{CircleContour, QuadratureScheme, ScalarFunction};
pub use report::VerificationReport;
pub use stateprep::StatePreparationPair;
