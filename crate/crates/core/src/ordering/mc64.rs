//! Maximum-product bipartite matching with equilibration scalings.
//!
//! Each entry gets the cost `c_ij = log(max_k |a_kj|) - log |a_ij| >= 0`; a
//! minimum-cost perfect matching on these costs maximizes the product of the
//! matched magnitudes. The matching is grown one row at a time by Dijkstra
//! shortest augmenting paths over reduced costs `c_ij - u_i - v_j`, which stay
//! nonnegative throughout. The final duals give
//! `D_r[i] = exp(u_i)` and `D_c[j] = exp(v_j) / max_k |a_kj|`, so the scaled
//! matrix has unit magnitude on matched entries and at most one elsewhere.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, DiagonalScaling, Permutation};

/// Output of [`mc64_scale`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingResult {
    /// Column permutation: original column `j` moves to position
    /// `col_perm.apply(j)`, which is the row it is matched to.
    pub col_perm: Permutation,
    pub scaling: DiagonalScaling,
    /// Sum of `log |a_{i,σ(i)}|` over the matching.
    pub matched_product: f64,
}

impl MatchingResult {
    /// Column matched to row `i`.
    pub fn matched_col(&self, i: usize) -> usize {
        self.col_perm.inverse()[i]
    }
}

const UNMATCHED: usize = usize::MAX;

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    col: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    // min-heap on (dist, col)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.col.cmp(&self.col))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Computes the maximum-product perfect matching and its scalings.
///
/// Stored entries with value exactly zero are not matching candidates.
pub fn mc64_scale(a: &CsrMatrix) -> Result<MatchingResult> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            nrows: a.nrows,
            ncols: a.ncols,
        });
    }
    let n = a.nrows;

    // candidate edges and costs, row-major
    let mut col_max = vec![0.0f64; n];
    for i in 0..n {
        for (j, v) in a.row(i) {
            col_max[j] = col_max[j].max(v.abs());
        }
    }
    if let Some(j) = col_max.iter().position(|&m| m == 0.0) {
        return Err(structurally_singular_cols(a, j));
    }
    let log_col_max: Vec<f64> = col_max.iter().map(|m| m.ln()).collect();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(a.nnz());
    let mut cost = Vec::with_capacity(a.nnz());
    let mut log_abs = Vec::with_capacity(a.nnz());
    offsets.push(0);
    for i in 0..n {
        for (j, v) in a.row(i) {
            if v != 0.0 {
                let la = v.abs().ln();
                cols.push(j);
                log_abs.push(la);
                cost.push((log_col_max[j] - la).max(0.0));
            }
        }
        if cols.len() == *offsets.last().unwrap() {
            return Err(Error::StructurallySingular { rows: vec![i] });
        }
        offsets.push(cols.len());
    }

    // Dual initialization: v_j = min_i c_ij, u_i = min_j (c_ij - v_j), then
    // match greedily along tight edges.
    let mut v = vec![f64::INFINITY; n];
    for k in 0..cols.len() {
        v[cols[k]] = v[cols[k]].min(cost[k]);
    }
    let mut u = vec![0.0f64; n];
    let mut row_match = vec![UNMATCHED; n];
    let mut col_match = vec![UNMATCHED; n];
    for i in 0..n {
        // among tight columns prefer unmatched ones, then the diagonal
        let rank = |k: usize| {
            let j = cols[k];
            (cost[k] - v[j], col_match[j] != UNMATCHED, j != i)
        };
        let best_k = (offsets[i]..offsets[i + 1])
            .min_by(|&x, &y| rank(x).partial_cmp(&rank(y)).unwrap())
            .expect("row has candidates");
        let best_col = cols[best_k];
        u[i] = cost[best_k] - v[best_col];
        if col_match[best_col] == UNMATCHED {
            row_match[i] = best_col;
            col_match[best_col] = i;
        }
    }

    let mut dist = vec![f64::INFINITY; n];
    let mut pred_row = vec![UNMATCHED; n];
    let mut done = vec![false; n];
    let mut touched_cols: Vec<usize> = Vec::new();
    let mut visited_rows: Vec<(usize, f64)> = Vec::new();
    let mut heap = BinaryHeap::new();

    for root in 0..n {
        if row_match[root] != UNMATCHED {
            continue;
        }
        for &j in &touched_cols {
            dist[j] = f64::INFINITY;
            pred_row[j] = UNMATCHED;
            done[j] = false;
        }
        touched_cols.clear();
        visited_rows.clear();
        heap.clear();

        let mut row = root;
        let mut row_dist = 0.0;
        let mut finish: Option<(usize, f64)> = None;
        loop {
            visited_rows.push((row, row_dist));
            for k in offsets[row]..offsets[row + 1] {
                let j = cols[k];
                if done[j] {
                    continue;
                }
                let rc = (cost[k] - u[row] - v[j]).max(0.0);
                let d = row_dist + rc;
                if d < dist[j] {
                    if dist[j] == f64::INFINITY {
                        touched_cols.push(j);
                    }
                    dist[j] = d;
                    pred_row[j] = row;
                    heap.push(HeapItem { dist: d, col: j });
                }
            }
            let next = loop {
                match heap.pop() {
                    None => break None,
                    Some(item) if done[item.col] || item.dist > dist[item.col] => continue,
                    Some(item) => break Some(item),
                }
            };
            let Some(HeapItem { dist: d, col: j }) = next else {
                break;
            };
            done[j] = true;
            if col_match[j] == UNMATCHED {
                finish = Some((j, d));
                break;
            }
            row = col_match[j];
            row_dist = d;
        }

        let Some((end_col, shortest)) = finish else {
            let mut rows: Vec<usize> = visited_rows.iter().map(|r| r.0).collect();
            rows.sort_unstable();
            return Err(Error::StructurallySingular { rows });
        };

        for &(r, dr) in &visited_rows {
            u[r] += shortest - dr;
        }
        for &j in &touched_cols {
            if done[j] {
                v[j] -= shortest - dist[j];
            }
        }
        // augment along predecessors
        let mut j = end_col;
        loop {
            let r = pred_row[j];
            let prev = row_match[r];
            row_match[r] = j;
            col_match[j] = r;
            if r == root {
                break;
            }
            j = prev;
        }
    }

    let mut matched_product = 0.0;
    for i in 0..n {
        let j = row_match[i];
        let k = offsets[i] + cols[offsets[i]..offsets[i + 1]].binary_search(&j).unwrap();
        matched_product += log_abs[k];
    }

    let row_scale: Vec<f64> = u.iter().map(|x| x.exp()).collect();
    let col_scale: Vec<f64> = (0..n).map(|j| (v[j] - log_col_max[j]).exp()).collect();
    let scaling = DiagonalScaling::new(row_scale, col_scale).map_err(|_| {
        Error::InvalidStructure("matching duals produced a non-finite scale".into())
    })?;
    let col_perm = Permutation::from_forward(col_match)?;
    Ok(MatchingResult {
        col_perm,
        scaling,
        matched_product,
    })
}

// An empty column leaves n rows with at most n - 1 neighbor columns.
fn structurally_singular_cols(a: &CsrMatrix, _empty_col: usize) -> Error {
    Error::StructurallySingular {
        rows: (0..a.nrows).collect(),
    }
}
