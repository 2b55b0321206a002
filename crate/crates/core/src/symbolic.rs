//! One-time structural analysis.
//!
//! [`symbolic_analyze`] runs the preprocessing chain (optional matching and
//! equilibration, fill-reducing ordering on `A + Aᵀ`), computes the filled
//! L+U pattern of the transformed matrix and precomputes everything the
//! numeric phase reuses across a sequence: per-row lookups, diagonal
//! positions and the scatter map from the source pattern into the combined
//! storage.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::lookup::RowLookup;
use crate::ordering::{amd_order, mc64_scale, MatchingResult};
use crate::sparse::{CsrMatrix, DiagonalScaling, Permutation};

/// Preprocessing switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyzeOptions {
    pub use_scaling: bool,
    pub use_amd: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            use_scaling: true,
            use_amd: true,
        }
    }
}

/// Filled pattern of `B` under the fill-path rule: `(i, j)` is present iff
/// `B` has a path from `i` to `j` whose intermediate vertices are all below
/// `min(i, j)`.
///
/// Rows are built top-down. Row `i` starts from `B`'s row `i`; every lower
/// column `d` (taken in ascending order, including ones introduced along the
/// way) merges the strictly upper part of filled row `d`.
///
/// The result carries the filled pattern with all values zero.
pub fn fill1_pattern(b: &CsrMatrix) -> Result<CsrMatrix> {
    if !b.is_square() {
        return Err(Error::NotSquare {
            nrows: b.nrows,
            ncols: b.ncols,
        });
    }
    let n = b.nrows;
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices: Vec<usize> = Vec::with_capacity(b.nnz());
    let mut diag_pos: Vec<usize> = Vec::with_capacity(n);
    row_offsets.push(0);

    let mut mark = vec![usize::MAX; n];
    let mut row: Vec<usize> = Vec::new();
    let mut pending: BinaryHeap<Reverse<usize>> = BinaryHeap::new();

    for i in 0..n {
        if b.get(i, i).is_none() {
            return Err(Error::ZeroDiagonal(i));
        }
        row.clear();
        for &j in b.row_cols(i) {
            mark[j] = i;
            row.push(j);
            if j < i {
                pending.push(Reverse(j));
            }
        }
        while let Some(Reverse(d)) = pending.pop() {
            let upper = diag_pos[d] + 1..row_offsets[d + 1];
            for k in upper {
                let j = col_indices[k];
                if mark[j] != i {
                    mark[j] = i;
                    row.push(j);
                    if j < i {
                        pending.push(Reverse(j));
                    }
                }
            }
        }
        row.sort_unstable();
        let start = col_indices.len();
        let dpos = start + row.binary_search(&i).expect("diagonal present");
        diag_pos.push(dpos);
        col_indices.extend_from_slice(&row);
        row_offsets.push(col_indices.len());
    }
    let values = vec![0.0; col_indices.len()];
    Ok(CsrMatrix {
        nrows: n,
        ncols: n,
        row_offsets,
        col_indices,
        values,
    })
}

/// Reusable product of the analysis phase.
#[derive(Debug, Clone)]
pub struct SymbolicFactors {
    n: usize,
    /// Combined pattern: strictly lower part is L (unit diagonal implied),
    /// diagonal and upper part are U.
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    diag_pos: Vec<usize>,
    lookups: Vec<RowLookup>,
    matching: Option<MatchingResult>,
    ordering: Permutation,
    source_row_offsets: Vec<usize>,
    source_col_indices: Vec<usize>,
    // original row i -> transformed row; original column j -> transformed column
    row_map: Vec<usize>,
    col_map: Vec<usize>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    scatter_target: Vec<usize>,
}

impl SymbolicFactors {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored entries in the combined L+U pattern.
    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    /// Absolute offsets of the diagonal entries.
    pub fn diag_pos(&self) -> &[usize] {
        &self.diag_pos
    }

    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    pub fn lower_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_offsets[i]..self.diag_pos[i]
    }

    pub fn upper_range(&self, i: usize) -> std::ops::Range<usize> {
        self.diag_pos[i] + 1..self.row_offsets[i + 1]
    }

    pub fn lookup(&self, i: usize) -> &RowLookup {
        &self.lookups[i]
    }

    pub fn matching(&self) -> Option<&MatchingResult> {
        self.matching.as_ref()
    }

    pub fn ordering(&self) -> &Permutation {
        &self.ordering
    }

    pub fn row_map(&self) -> &[usize] {
        &self.row_map
    }

    pub fn col_map(&self) -> &[usize] {
        &self.col_map
    }

    pub fn row_scale(&self) -> &[f64] {
        &self.row_scale
    }

    pub fn col_scale(&self) -> &[f64] {
        &self.col_scale
    }

    /// Destination offset in the combined storage of each source entry.
    pub fn scatter_target(&self) -> &[usize] {
        &self.scatter_target
    }

    pub(crate) fn source_row_offsets(&self) -> &[usize] {
        &self.source_row_offsets
    }

    pub(crate) fn source_col_indices(&self) -> &[usize] {
        &self.source_col_indices
    }

    /// Combined pattern as a CSR matrix with zero values.
    pub fn combined_pattern(&self) -> CsrMatrix {
        CsrMatrix {
            nrows: self.n,
            ncols: self.n,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: vec![0.0; self.nnz()],
        }
    }

    /// True when `a` has exactly the pattern this analysis was built for.
    pub fn matches_pattern(&self, a: &CsrMatrix) -> bool {
        a.nrows == self.n
            && a.ncols == self.n
            && a.row_offsets == self.source_row_offsets
            && a.col_indices == self.source_col_indices
    }

    /// Pattern of the analyzed source matrix.
    pub fn source_pattern(&self) -> CsrMatrix {
        CsrMatrix {
            nrows: self.n,
            ncols: self.n,
            row_offsets: self.source_row_offsets.clone(),
            col_indices: self.source_col_indices.clone(),
            values: vec![0.0; self.source_col_indices.len()],
        }
    }

    /// The transformed matrix `B = P (D_r A D_c Qᵀ) Pᵀ` that gets factored,
    /// built through the general permutation and scaling operations.
    pub fn transform(&self, a: &CsrMatrix) -> Result<CsrMatrix> {
        let n = self.n;
        let (scaled, col_perm) = match &self.matching {
            Some(m) => (a.apply_scaling(&m.scaling)?, m.col_perm.clone()),
            None => (a.clone(), Permutation::identity(n)),
        };
        let col_permuted = scaled.permute(&Permutation::identity(n), &col_perm)?;
        col_permuted.permute_symmetric(&self.ordering)
    }
}

/// Runs the full analysis on `a`.
pub fn symbolic_analyze(a: &CsrMatrix, options: AnalyzeOptions) -> Result<SymbolicFactors> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            nrows: a.nrows,
            ncols: a.ncols,
        });
    }
    a.check_structure()?;
    let n = a.nrows;

    let matching = if options.use_scaling {
        Some(mc64_scale(a)?)
    } else {
        None
    };
    let identity = Permutation::identity(n);
    let col_perm = matching.as_ref().map_or(&identity, |m| &m.col_perm);

    let matched = a.permute(&identity, col_perm)?;
    let ordering = if options.use_amd {
        amd_order(&matched.symmetrized_pattern()?)?
    } else {
        identity.clone()
    };
    let b = matched.permute_symmetric(&ordering)?;
    let filled = fill1_pattern(&b)?;

    let diag_pos: Vec<usize> = (0..n)
        .map(|i| filled.find(i, i).expect("filled rows hold their diagonal"))
        .collect();
    let lookups: Vec<RowLookup> = (0..n)
        .map(|i| RowLookup::build(filled.row_cols(i)))
        .collect();

    let row_map = ordering.forward().to_vec();
    let col_map: Vec<usize> = (0..n).map(|j| ordering.apply(col_perm.apply(j))).collect();
    let scaling = matching
        .as_ref()
        .map_or_else(|| DiagonalScaling::ones(n), |m| m.scaling.clone());

    let mut scatter_target = Vec::with_capacity(a.nnz());
    for i in 0..n {
        let r = row_map[i];
        for &j in a.row_cols(i) {
            let c = col_map[j];
            let off = lookups[r]
                .get(c)
                .expect("filled pattern contains the transformed source pattern");
            scatter_target.push(filled.row_offsets[r] + off);
        }
    }

    Ok(SymbolicFactors {
        n,
        row_offsets: filled.row_offsets,
        col_indices: filled.col_indices,
        diag_pos,
        lookups,
        matching,
        ordering,
        source_row_offsets: a.row_offsets.clone(),
        source_col_indices: a.col_indices.clone(),
        row_map,
        col_map,
        row_scale: scaling.row_scale,
        col_scale: scaling.col_scale,
        scatter_target,
    })
}
