//! Sparse LU for sequences of identically patterned KKT systems.
//!
//! The pipeline is: matching and scaling ([`ordering::mc64_scale`]),
//! fill-reducing ordering ([`ordering::amd_order`]), symbolic factorization
//! of the filled L+U pattern ([`symbolic::symbolic_analyze`]), numeric
//! factorization that can be repeated for new values on the same pattern
//! ([`numeric::NumericFactors::refactorize`]), scheduled triangular solves
//! ([`trisolve`]) and FGMRES refinement ([`refine`]).

pub mod error;
pub mod kkt;
pub mod lookup;
pub mod numeric;
pub mod ordering;
pub mod refine;
pub mod schedule;
pub mod sparse;
pub mod symbolic;
pub mod trisolve;

pub use error::{Error, Result};
pub use numeric::{factorize, FactorOptions, NumericFactors};
pub use schedule::{ExecMode, Execution};
pub use sparse::{CooMatrix, CsrMatrix, DiagonalScaling, Permutation};
pub use symbolic::{symbolic_analyze, AnalyzeOptions, SymbolicFactors};
pub use trisolve::{solve_into, solve_system, SolveWorkspace};
