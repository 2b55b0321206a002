use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("line {line}: index ({row}, {col}) out of range for {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        line: usize,
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square, found {nrows}x{ncols}")]
    NotSquare { nrows: usize, ncols: usize },

    #[error("invalid matrix structure: {0}")]
    InvalidStructure(String),

    #[error("scale factors must be positive and finite (index {0})")]
    NonPositiveScale(usize),

    #[error("matrix is structurally singular; deficient rows {rows:?}")]
    StructurallySingular { rows: Vec<usize> },

    #[error("structurally zero diagonal at row {0}")]
    ZeroDiagonal(usize),

    #[error("zero pivot at row {0}")]
    ZeroPivot(usize),

    #[error("sparsity pattern differs from the analyzed pattern; re-analysis required")]
    RequiresReanalysis,

    #[error("Hessian block is not symmetric at ({row}, {col})")]
    AsymmetricHessian { row: usize, col: usize },

    #[error("pattern mismatch at sequence index {0}")]
    SequencePatternMismatch(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
