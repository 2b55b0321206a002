use crate::error::{Error, Result};

use super::{CooMatrix, DiagonalScaling, Permutation};

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from raw arrays, checking the structural invariants.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let m = Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        };
        m.check_structure()?;
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Row-major dense input; exact zeros are not stored.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged dense input");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                out[i][j] = v;
            }
        }
        out
    }

    pub fn to_coo(&self) -> CooMatrix {
        let mut coo = CooMatrix::with_capacity(self.nrows, self.ncols, self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                coo.push(i, j, v);
            }
        }
        coo
    }

    pub fn nnz(&self) -> usize {
        self.row_offsets[self.nrows]
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_offsets[i]..self.row_offsets[i + 1]
    }

    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_range(i)]
    }

    pub fn row_values(&self, i: usize) -> &[f64] {
        &self.values[self.row_range(i)]
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row_cols(i)
            .iter()
            .copied()
            .zip(self.row_values(i).iter().copied())
    }

    /// Stored value at `(i, j)`, if present.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let cols = self.row_cols(i);
        cols.binary_search(&j)
            .ok()
            .map(|k| self.values[self.row_offsets[i] + k])
    }

    /// Offset of `(i, j)` in `col_indices`/`values`, if present.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        self.row_cols(i)
            .binary_search(&j)
            .ok()
            .map(|k| self.row_offsets[i] + k)
    }

    /// Checks the CSR invariants: monotone offsets, strictly increasing
    /// in-range column indices per row, array lengths consistent.
    pub fn check_structure(&self) -> Result<()> {
        if self.row_offsets.len() != self.nrows + 1 || self.row_offsets[0] != 0 {
            return Err(Error::InvalidStructure("bad row_offsets length".into()));
        }
        if self.col_indices.len() != self.nnz() || self.values.len() != self.nnz() {
            return Err(Error::InvalidStructure("nnz does not match arrays".into()));
        }
        for i in 0..self.nrows {
            if self.row_offsets[i] > self.row_offsets[i + 1] {
                return Err(Error::InvalidStructure(format!(
                    "row_offsets decrease at row {i}"
                )));
            }
            let cols = self.row_cols(i);
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidStructure(format!(
                    "columns not strictly increasing in row {i}"
                )));
            }
            if cols.last().is_some_and(|&c| c >= self.ncols) {
                return Err(Error::InvalidStructure(format!(
                    "column out of range in row {i}"
                )));
            }
        }
        Ok(())
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                let dst = next[j];
                col_indices[dst] = i;
                values[dst] = v;
                next[j] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// `y = A x`, accumulating each row left to right.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                found: x.len(),
            });
        }
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                found: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let range = self.row_range(i);
            let mut acc = 0.0;
            for k in range {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yi = acc;
        }
        Ok(())
    }

    /// `B = P A Pᵀ`, i.e. `B[p(i)][p(j)] = A[i][j]`.
    pub fn permute_symmetric(&self, perm: &Permutation) -> Result<CsrMatrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                nrows: self.nrows,
                ncols: self.ncols,
            });
        }
        if perm.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                found: perm.len(),
            });
        }
        self.permute(perm, perm)
    }

    /// `B[row_perm(i)][col_perm(j)] = A[i][j]`.
    pub fn permute(&self, row_perm: &Permutation, col_perm: &Permutation) -> Result<CsrMatrix> {
        if row_perm.len() != self.nrows || col_perm.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                found: row_perm.len(),
            });
        }
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        row_offsets.push(0);
        let mut buf: Vec<(usize, f64)> = Vec::new();
        for new_i in 0..self.nrows {
            let old_i = row_perm.inverse()[new_i];
            buf.clear();
            buf.extend(self.row(old_i).map(|(j, v)| (col_perm.apply(j), v)));
            buf.sort_unstable_by_key(|e| e.0);
            for &(j, v) in &buf {
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// `D_r A D_c`.
    pub fn apply_scaling(&self, scaling: &DiagonalScaling) -> Result<CsrMatrix> {
        if scaling.row_scale.len() != self.nrows || scaling.col_scale.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                found: scaling.row_scale.len(),
            });
        }
        scaling.validate()?;
        let mut out = self.clone();
        for i in 0..self.nrows {
            let r = scaling.row_scale[i];
            for k in self.row_range(i) {
                out.values[k] = r * self.values[k] * scaling.col_scale[self.col_indices[k]];
            }
        }
        Ok(out)
    }

    /// True iff dimensions, row offsets and column indices are identical.
    pub fn pattern_equal(&self, other: &CsrMatrix) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.row_offsets == other.row_offsets
            && self.col_indices == other.col_indices
    }

    /// Pattern of `A + Aᵀ`; values are set to one.
    pub fn symmetrized_pattern(&self) -> Result<CsrMatrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                nrows: self.nrows,
                ncols: self.ncols,
            });
        }
        let t = self.transpose();
        let n = self.nrows;
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(2 * self.nnz());
        row_offsets.push(0);
        for i in 0..n {
            let (a, b) = (self.row_cols(i), t.row_cols(i));
            let (mut p, mut q) = (0, 0);
            while p < a.len() || q < b.len() {
                let next = match (a.get(p), b.get(q)) {
                    (Some(&x), Some(&y)) if x == y => {
                        p += 1;
                        q += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        p += 1;
                        x
                    }
                    (Some(_), Some(&y)) => {
                        q += 1;
                        y
                    }
                    (Some(&x), None) => {
                        p += 1;
                        x
                    }
                    (None, Some(&y)) => {
                        q += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                col_indices.push(next);
            }
            row_offsets.push(col_indices.len());
        }
        let values = vec![1.0; col_indices.len()];
        Ok(CsrMatrix {
            nrows: n,
            ncols: n,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a22() -> CsrMatrix {
        CsrMatrix::from_dense(&[vec![4.0, 3.0], vec![6.0, 3.0]])
    }

    #[test]
    fn spmv_examples() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 3.0]]);
        assert_eq!(a.spmv(&[1.0, 1.0]).unwrap(), vec![3.0, 3.0]);
        assert_eq!(a22().spmv(&[1.0, 2.0]).unwrap(), vec![10.0, 12.0]);
        let x = vec![0.5, -2.0, 7.25];
        assert_eq!(CsrMatrix::identity(3).spmv(&x).unwrap(), x);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        assert!(matches!(
            a22().spmv(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn permute_swap() {
        let p = Permutation::from_forward(vec![1, 0]).unwrap();
        let b = a22().permute_symmetric(&p).unwrap();
        assert_eq!(b.to_dense(), vec![vec![3.0, 6.0], vec![3.0, 4.0]]);
        let id = a22().permute_symmetric(&Permutation::identity(2)).unwrap();
        assert_eq!(id, a22());
    }

    #[test]
    fn scaling_examples() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let s = DiagonalScaling::new(vec![2.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(
            a.apply_scaling(&s).unwrap().to_dense(),
            vec![vec![2.0, 2.0], vec![1.0, 1.0]]
        );
        assert_eq!(a.apply_scaling(&DiagonalScaling::ones(2)).unwrap(), a);

        let s = DiagonalScaling::new(vec![3.0, 0.7], vec![1.3, 5.0]).unwrap();
        let back = a22()
            .apply_scaling(&s)
            .unwrap()
            .apply_scaling(&s.inverted())
            .unwrap();
        for (x, y) in back.values.iter().zip(&a22().values) {
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * y.abs());
        }
    }

    #[test]
    fn pattern_equality() {
        let a = a22();
        let mut b = a.clone();
        b.values[0] = 100.0;
        assert!(a.pattern_equal(&b));
        let c = CsrMatrix::from_dense(&[vec![4.0, 0.0], vec![6.0, 3.0]]);
        assert!(!c.pattern_equal(&a));
        assert!(!a.pattern_equal(&CsrMatrix::identity(3)));
    }

    #[test]
    fn symmetrized_bidiagonal() {
        let a = CsrMatrix::from_dense(&[
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        let s = a.symmetrized_pattern().unwrap();
        assert_eq!(s.row_offsets, vec![0, 1, 3, 4]);
        assert_eq!(s.col_indices, vec![1, 0, 2, 1]);
    }

    #[test]
    fn symmetrized_dense_row() {
        let mut rows = vec![vec![0.0; 4]; 4];
        rows[2] = vec![1.0; 4];
        let s = CsrMatrix::from_dense(&rows).symmetrized_pattern().unwrap();
        for i in 0..4 {
            assert!(s.get(i, 2).is_some());
            assert!(s.get(2, i).is_some());
        }
    }

    #[test]
    fn transpose_roundtrip() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 0.0]]);
        let t = a.transpose();
        assert_eq!(t.nrows, 3);
        assert_eq!(t.get(2, 0), Some(2.0));
        assert_eq!(t.transpose(), a);
    }
}
