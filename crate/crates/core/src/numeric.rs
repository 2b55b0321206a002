//! Numeric factorization and refactorization without pivoting.
//!
//! Values of the source matrix are scattered into the combined L+U storage
//! (fill slots zeroed), then each row `i` is eliminated up-looking: for every
//! strictly lower column `d` in ascending order,
//!
//! ```text
//! l_id = a_id / u_dd
//! a_ij -= l_id * u_dj      for every stored u_dj, j > d
//! ```
//!
//! with `a_ij` located through row `i`'s lookup. A row may start only the
//! update from row `d` once row `d` is complete, which the scheduler enforces
//! through ready flags.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::schedule::{self, ClaimOrder, Execution, ReadyFlags, RowTask, SharedSlice};
use crate::sparse::CsrMatrix;
use crate::symbolic::SymbolicFactors;

pub const DEFAULT_PIVOT_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorOptions {
    pub execution: Execution,
    /// Pivots with `|u_ii| <= pivot_floor` fail the factorization.
    pub pivot_floor: f64,
}

impl Default for FactorOptions {
    fn default() -> Self {
        Self {
            execution: Execution::sequential(),
            pivot_floor: DEFAULT_PIVOT_FLOOR,
        }
    }
}

impl FactorOptions {
    pub fn sequential() -> Self {
        Self::default()
    }

    pub fn scheduled(worker_count: usize) -> Self {
        Self {
            execution: Execution::scheduled(worker_count),
            ..Self::default()
        }
    }
}

/// Numeric values aligned with a [`SymbolicFactors`] combined pattern.
#[derive(Debug, Clone)]
pub struct NumericFactors {
    symbolic: Arc<SymbolicFactors>,
    values: Vec<f64>,
    generation: u64,
    options: FactorOptions,
    ready: ReadyFlagsCell,
}

// ready flags are scratch state; clones start with their own
#[derive(Debug, Default)]
struct ReadyFlagsCell(ReadyFlags);

impl Clone for ReadyFlagsCell {
    fn clone(&self) -> Self {
        Self::default()
    }
}

impl NumericFactors {
    /// Zero-valued storage for `symbolic`; fill it with
    /// [`NumericFactors::scatter`] and [`NumericFactors::factor_scattered`].
    pub fn new(symbolic: Arc<SymbolicFactors>, options: FactorOptions) -> Self {
        let values = vec![0.0; symbolic.nnz()];
        Self {
            symbolic,
            values,
            generation: 0,
            options,
            ready: ReadyFlagsCell::default(),
        }
    }

    pub fn symbolic(&self) -> &Arc<SymbolicFactors> {
        &self.symbolic
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of completed (re)factorizations.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn options(&self) -> &FactorOptions {
        &self.options
    }

    pub fn set_options(&mut self, options: FactorOptions) {
        self.options = options;
    }

    /// Unit lower triangular factor, diagonal included explicitly.
    pub fn l_factor(&self) -> CsrMatrix {
        let s = &self.symbolic;
        let n = s.n();
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            for k in s.lower_range(i) {
                col_indices.push(s.col_indices()[k]);
                values.push(self.values[k]);
            }
            col_indices.push(i);
            values.push(1.0);
            row_offsets.push(col_indices.len());
        }
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Upper triangular factor including the diagonal.
    pub fn u_factor(&self) -> CsrMatrix {
        let s = &self.symbolic;
        let n = s.n();
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            for k in s.diag_pos()[i]..s.row_offsets()[i + 1] {
                col_indices.push(s.col_indices()[k]);
                values.push(self.values[k]);
            }
            row_offsets.push(col_indices.len());
        }
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Re-factors a matrix with the analyzed pattern, reusing all symbolic
    /// data and the existing value storage.
    pub fn refactorize(&mut self, a: &CsrMatrix) -> Result<()> {
        self.scatter(a)?;
        self.factor_scattered()
    }

    /// First half of [`NumericFactors::refactorize`]: loads the transformed
    /// values of `a` into storage without eliminating.
    pub fn scatter(&mut self, a: &CsrMatrix) -> Result<()> {
        if !self.symbolic.matches_pattern(a) {
            return Err(Error::RequiresReanalysis);
        }
        scatter_into(&self.symbolic, &a.values, &mut self.values)
    }

    /// Second half of [`NumericFactors::refactorize`]. Only meaningful
    /// directly after [`NumericFactors::scatter`].
    pub fn factor_scattered(&mut self) -> Result<()> {
        let result = eliminate(
            &self.symbolic,
            &mut self.values,
            &self.options,
            &mut self.ready.0,
        );
        self.generation += 1;
        result
    }
}

/// Writes the scaled, permuted source values into combined storage and
/// zeroes every fill slot.
pub fn scatter_values(symbolic: &SymbolicFactors, a_values: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; symbolic.nnz()];
    scatter_into(symbolic, a_values, &mut out)?;
    Ok(out)
}

fn scatter_into(symbolic: &SymbolicFactors, a_values: &[f64], out: &mut [f64]) -> Result<()> {
    let target = symbolic.scatter_target();
    if a_values.len() != target.len() {
        return Err(Error::RequiresReanalysis);
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    let offsets = symbolic.source_row_offsets();
    let cols = symbolic.source_col_indices();
    let (rs, cs) = (symbolic.row_scale(), symbolic.col_scale());
    for i in 0..symbolic.n() {
        let r = rs[i];
        for k in offsets[i]..offsets[i + 1] {
            out[target[k]] = r * a_values[k] * cs[cols[k]];
        }
    }
    Ok(())
}

/// Factors `a`, whose pattern must match the analyzed one.
pub fn factorize(
    symbolic: &Arc<SymbolicFactors>,
    a: &CsrMatrix,
    options: FactorOptions,
) -> Result<NumericFactors> {
    if !symbolic.matches_pattern(a) {
        return Err(Error::RequiresReanalysis);
    }
    let mut values = scatter_values(symbolic, &a.values)?;
    let mut ready = ReadyFlags::default();
    eliminate(symbolic, &mut values, &options, &mut ready)?;
    Ok(NumericFactors {
        symbolic: Arc::clone(symbolic),
        values,
        generation: 1,
        options,
        ready: ReadyFlagsCell(ready),
    })
}

struct FactorTask<'a> {
    sym: &'a SymbolicFactors,
    vals: SharedSlice<'a>,
    pivot_floor: f64,
    first_bad_pivot: AtomicUsize,
}

impl RowTask for FactorTask<'_> {
    // next lower-triangle offset to eliminate
    type State = usize;

    fn begin(&self, row: usize) -> usize {
        self.sym.row_offsets()[row]
    }

    fn advance(&self, row: usize, cursor: &mut usize, ready: &ReadyFlags) -> bool {
        let sym = self.sym;
        let cols = sym.col_indices();
        let diag = sym.diag_pos();
        let start = sym.row_offsets()[row];
        let lookup = sym.lookup(row);
        while *cursor < diag[row] {
            let d = cols[*cursor];
            if !ready.is_ready(d) {
                return false;
            }
            // SAFETY: row `row` is owned by this worker; row `d` is complete.
            unsafe {
                let alpha = self.vals.get(*cursor) / self.vals.get(diag[d]);
                self.vals.set(*cursor, alpha);
                for k in sym.upper_range(d) {
                    let off = lookup
                        .get(cols[k])
                        .expect("filled pattern is closed under row updates");
                    let dst = start + off;
                    self.vals
                        .set(dst, self.vals.get(dst) - alpha * self.vals.get(k));
                }
            }
            *cursor += 1;
        }
        // SAFETY: own row
        let pivot = unsafe { self.vals.get(diag[row]) };
        if !(pivot.abs() > self.pivot_floor) {
            self.first_bad_pivot.fetch_min(row, Ordering::Relaxed);
        }
        true
    }
}

fn eliminate(
    symbolic: &SymbolicFactors,
    values: &mut [f64],
    options: &FactorOptions,
    ready: &mut ReadyFlags,
) -> Result<()> {
    let task = FactorTask {
        sym: symbolic,
        vals: SharedSlice::new(values),
        pivot_floor: options.pivot_floor,
        first_bad_pivot: AtomicUsize::new(usize::MAX),
    };
    schedule::run(
        &task,
        symbolic.n(),
        ClaimOrder::Ascending,
        options.execution,
        ready,
    );
    match task.first_bad_pivot.into_inner() {
        usize::MAX => Ok(()),
        row => Err(Error::ZeroPivot(row)),
    }
}
