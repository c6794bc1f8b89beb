//! Correlation matrices and the moment matrices of unitary tuples.
//!
//! The crate covers the complex elliptope of unit-diagonal positive
//! semidefinite matrices: frame factorizations, extreme point tests and
//! decompositions, Clifford realizations of real correlation matrices,
//! moment matrices of unitary tuples with their closure constructions,
//! and certified lower bounds on how far a matrix can be mixed with the
//! identity while staying a commuting or matricial moment matrix.

pub mod bounds;
pub mod clifford;
pub mod correlation;
pub mod error;
pub mod extremality;
pub mod fixtures;
pub mod json;
pub mod matkernel;
pub mod moments;
pub mod random;

pub use clifford::UnitaryTuple;
pub use correlation::{CorrelationMatrix, Frame};
pub use error::{Error, Result};
pub use matkernel::{CMatrix, HermitianMatrix, Tolerance, C64};
