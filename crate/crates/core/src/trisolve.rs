//! Triangular solves on the combined factor storage and the full solve
//! composition `x = D_c Q Pᵀ U⁻¹ L⁻¹ P D_r b`.
//!
//! Both substitutions run through the same row scheduler as the
//! factorization. Completion is tracked by explicit ready flags rather than
//! by marking unsolved entries with NaN, so a computed NaN is never mistaken
//! for "not yet solved".

use crate::error::{Error, Result};
use crate::numeric::NumericFactors;
use crate::schedule::{self, ClaimOrder, Execution, ReadyFlags, RowTask, SharedSlice};
use crate::symbolic::SymbolicFactors;

/// Buffers reused across solves. Sized on first use.
#[derive(Debug, Default)]
pub struct SolveWorkspace {
    buffer: Vec<f64>,
    ready: ReadyFlags,
    allocations: usize,
}

impl SolveWorkspace {
    pub fn new(n: usize) -> Self {
        let mut ws = Self::default();
        ws.ensure(n);
        ws
    }

    /// Number of times buffer storage was (re)allocated.
    pub fn allocations(&self) -> usize {
        self.allocations
    }

    fn ensure(&mut self, n: usize) {
        if self.buffer.len() != n {
            self.buffer = vec![0.0; n];
            self.ready.reset(n);
            self.allocations += 1;
        }
    }
}

struct LowerTask<'a> {
    sym: &'a SymbolicFactors,
    lu: &'a [f64],
    x: SharedSlice<'a>,
}

impl RowTask for LowerTask<'_> {
    type State = (usize, f64);

    fn begin(&self, row: usize) -> (usize, f64) {
        // SAFETY: entry `row` belongs to this row
        (self.sym.row_offsets()[row], unsafe { self.x.get(row) })
    }

    fn advance(&self, row: usize, st: &mut (usize, f64), ready: &ReadyFlags) -> bool {
        let cols = self.sym.col_indices();
        let end = self.sym.diag_pos()[row];
        while st.0 < end {
            let d = cols[st.0];
            if !ready.is_ready(d) {
                return false;
            }
            // SAFETY: x[d] is final once its flag is set
            st.1 -= self.lu[st.0] * unsafe { self.x.get(d) };
            st.0 += 1;
        }
        unsafe { self.x.set(row, st.1) };
        true
    }
}

struct UpperTask<'a> {
    sym: &'a SymbolicFactors,
    lu: &'a [f64],
    x: SharedSlice<'a>,
}

impl RowTask for UpperTask<'_> {
    type State = (usize, f64);

    fn begin(&self, row: usize) -> (usize, f64) {
        (self.sym.diag_pos()[row] + 1, unsafe { self.x.get(row) })
    }

    fn advance(&self, row: usize, st: &mut (usize, f64), ready: &ReadyFlags) -> bool {
        let cols = self.sym.col_indices();
        let end = self.sym.row_offsets()[row + 1];
        while st.0 < end {
            let j = cols[st.0];
            if !ready.is_ready(j) {
                return false;
            }
            st.1 -= self.lu[st.0] * unsafe { self.x.get(j) };
            st.0 += 1;
        }
        let u_ii = self.lu[self.sym.diag_pos()[row]];
        unsafe { self.x.set(row, st.1 / u_ii) };
        true
    }
}

fn check_dim(factors: &NumericFactors, len: usize) -> Result<()> {
    let n = factors.symbolic().n();
    if len != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: len,
        });
    }
    Ok(())
}

fn check_diagonal(factors: &NumericFactors) -> Result<()> {
    let sym = factors.symbolic();
    let vals = factors.values();
    match sym.diag_pos().iter().position(|&p| vals[p] == 0.0) {
        Some(i) => Err(Error::ZeroPivot(i)),
        None => Ok(()),
    }
}

fn lower_in_place(
    factors: &NumericFactors,
    x: &mut [f64],
    exec: Execution,
    ready: &mut ReadyFlags,
) {
    let sym = factors.symbolic();
    let task = LowerTask {
        sym,
        lu: factors.values(),
        x: SharedSlice::new(x),
    };
    schedule::run(&task, sym.n(), ClaimOrder::Ascending, exec, ready);
}

fn upper_in_place(
    factors: &NumericFactors,
    x: &mut [f64],
    exec: Execution,
    ready: &mut ReadyFlags,
) {
    let sym = factors.symbolic();
    let task = UpperTask {
        sym,
        lu: factors.values(),
        x: SharedSlice::new(x),
    };
    schedule::run(&task, sym.n(), ClaimOrder::Descending, exec, ready);
}

/// Solves `L x = y` with the unit lower factor.
pub fn lower_solve(factors: &NumericFactors, y: &[f64], exec: Execution) -> Result<Vec<f64>> {
    check_dim(factors, y.len())?;
    let mut x = y.to_vec();
    lower_in_place(factors, &mut x, exec, &mut ReadyFlags::default());
    Ok(x)
}

/// Solves `U x = y` by back substitution.
pub fn upper_solve(factors: &NumericFactors, y: &[f64], exec: Execution) -> Result<Vec<f64>> {
    check_dim(factors, y.len())?;
    check_diagonal(factors)?;
    let mut x = y.to_vec();
    upper_in_place(factors, &mut x, exec, &mut ReadyFlags::default());
    Ok(x)
}

/// Solves `A x = b` for the original matrix, writing into `x`.
///
/// Uses the execution settings stored with the factors.
pub fn solve_into(
    factors: &NumericFactors,
    b: &[f64],
    x: &mut [f64],
    ws: &mut SolveWorkspace,
) -> Result<()> {
    check_dim(factors, b.len())?;
    check_dim(factors, x.len())?;
    check_diagonal(factors)?;
    let sym = factors.symbolic();
    ws.ensure(sym.n());
    let exec = factors.options().execution;

    let (row_map, rs) = (sym.row_map(), sym.row_scale());
    for (i, &bi) in b.iter().enumerate() {
        ws.buffer[row_map[i]] = rs[i] * bi;
    }
    lower_in_place(factors, &mut ws.buffer, exec, &mut ws.ready);
    upper_in_place(factors, &mut ws.buffer, exec, &mut ws.ready);
    let (col_map, cs) = (sym.col_map(), sym.col_scale());
    for (j, xj) in x.iter_mut().enumerate() {
        *xj = cs[j] * ws.buffer[col_map[j]];
    }
    Ok(())
}

/// Allocating wrapper around [`solve_into`].
pub fn solve_system(
    factors: &NumericFactors,
    b: &[f64],
    ws: &mut SolveWorkspace,
) -> Result<Vec<f64>> {
    let mut x = vec![0.0; b.len()];
    solve_into(factors, b, &mut x, ws)?;
    Ok(x)
}
