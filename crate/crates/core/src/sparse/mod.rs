//! Sparse matrix containers and the structural operations shared by every
//! stage of the pipeline.
//!
//! Matrices are assembled as [`CooMatrix`] triplets, canonicalized (sorted,
//! duplicates summed) and compressed into [`CsrMatrix`], which is the storage
//! format used everywhere else. [`Permutation`] and [`DiagonalScaling`] carry
//! the transformations applied before factorization.

mod coo;
mod csr;
pub mod mm;
mod perm;

pub use coo::{coo_to_csr, CooMatrix};
pub use csr::CsrMatrix;
pub use perm::{DiagonalScaling, Permutation};

/// Euclidean norm.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Inner product with left-to-right accumulation.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
