//! Weighted weak group inverse of a rectangular complex matrix and the
//! generalized inverses it is built from.

pub mod cli;
pub mod conformance;
pub mod error;
pub mod ginverse;
pub mod io;
pub mod numeric;
pub mod relations;
pub mod spectral;

pub use error::{Error, Result};
pub use io::{MatrixDocument, MatrixFormat};
pub use numeric::{ComplexMatrix, NumericContext, SubspaceBasis};
