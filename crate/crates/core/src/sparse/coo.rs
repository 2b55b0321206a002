use crate::error::{Error, Result};

use super::CsrMatrix;

/// Triplet storage used for assembly and file ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(capacity),
        }
    }

    /// Appends an entry. Bounds are checked when the matrix is canonicalized.
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push((row, col, value));
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Sorts entries row-major and sums duplicates.
    pub fn canonicalize(&mut self) -> Result<()> {
        for &(r, c, _) in &self.entries {
            if r >= self.nrows || c >= self.ncols {
                return Err(Error::InvalidStructure(format!(
                    "entry ({r}, {c}) outside {}x{}",
                    self.nrows, self.ncols
                )));
            }
        }
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(r, c, v) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        self.entries = out;
        Ok(())
    }

    /// Value stored at `(row, col)` in a canonical matrix.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.entries
            .binary_search_by_key(&(row, col), |&(r, c, _)| (r, c))
            .ok()
            .map(|k| self.entries[k].2)
    }

    /// Compresses into CSR. Non-canonical input is canonicalized first.
    pub fn to_csr(&self) -> Result<CsrMatrix> {
        let mut coo = self.clone();
        coo.canonicalize()?;
        let mut row_offsets = vec![0usize; coo.nrows + 1];
        for &(r, _, _) in &coo.entries {
            row_offsets[r + 1] += 1;
        }
        for i in 0..coo.nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices = coo.entries.iter().map(|e| e.1).collect();
        let values = coo.entries.iter().map(|e| e.2).collect();
        Ok(CsrMatrix {
            nrows: coo.nrows,
            ncols: coo.ncols,
            row_offsets,
            col_indices,
            values,
        })
    }
}

/// Converts canonical COO to CSR.
pub fn coo_to_csr(coo: &CooMatrix) -> Result<CsrMatrix> {
    coo.to_csr()
}
