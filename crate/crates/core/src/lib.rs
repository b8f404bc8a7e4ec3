//! Singularity of random 0/1 matrices: exact rank and determinant,
//! hypercube points on spanned hyperplanes, the strong-rank partition,
//! Littlewood-Offord bounds, exact census for small dimensions and
//! reproducible Monte Carlo estimates.

pub mod census;
pub mod error;
pub mod exact;
pub mod lo;
pub mod matrix;
pub mod montecarlo;
pub mod parallel;
pub mod rng;
pub mod span;
pub mod stats;
pub mod structure;
mod subspace;

pub use error::{CubeError, Result};
pub use exact::RankMethod;
pub use matrix::{BinaryMatrix, IntegerVector, RankResult};
