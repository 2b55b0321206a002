//! Approximate minimum degree ordering on a quotient graph.
//!
//! Variables keep two adjacency lists: plain variable neighbors (`adj`) and
//! adjacent elements (`elems`). Eliminating pivot `p` turns it into an element
//! whose variable set `L_p` is the union of its variable neighbors and the
//! variable sets of all elements adjacent to it; those elements are absorbed.
//! Degrees of the variables in `L_p` are then refreshed with the usual
//! approximate bound
//!
//! ```text
//! d_i = min(n - k, d_i + |L_p \ i|, |A_i \ i| + |L_p \ i| + Σ_{e≠p} |L_e \ L_p|)
//! ```
//!
//! Ties on the approximate degree go to the vertex with the smaller original
//! degree, then to the lowest index. There is no
//! supervariable detection, aggressive absorption, or dense-row handling.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, Permutation};

/// Computes a fill-reducing symmetric ordering of a symmetric pattern.
///
/// The returned permutation maps each vertex to its elimination position.
/// Diagonal entries are ignored.
pub fn amd_order(pattern: &CsrMatrix) -> Result<Permutation> {
    if !pattern.is_square() {
        return Err(Error::NotSquare {
            nrows: pattern.nrows,
            ncols: pattern.ncols,
        });
    }
    let n = pattern.nrows;
    let mut adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            pattern
                .row_cols(i)
                .iter()
                .copied()
                .filter(|&j| j != i)
                .collect()
        })
        .collect();
    let mut elems: Vec<Vec<usize>> = vec![Vec::new(); n];
    // element variable lists, indexed by the pivot that created the element
    let mut elem_vars: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut eliminated = vec![false; n];
    let mut absorbed = vec![false; n];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let orig: Vec<usize> = degree.clone();
    let mut queue: BTreeSet<(usize, usize, usize)> =
        (0..n).map(|i| (degree[i], orig[i], i)).collect();
    let mut order = Vec::with_capacity(n);

    let mut in_lp = vec![false; n];
    let mut w = vec![0usize; n];
    let mut w_stamp = vec![usize::MAX; n];

    for step in 0..n {
        let (_, _, p) = queue.pop_first().expect("queue holds every live variable");
        order.push(p);
        eliminated[p] = true;

        // L_p = (A_p ∪ ⋃ L_e) \ {p}
        let mut lp: Vec<usize> = Vec::new();
        in_lp[p] = true;
        for &j in &adj[p] {
            if !eliminated[j] && !in_lp[j] {
                in_lp[j] = true;
                lp.push(j);
            }
        }
        let p_elems = std::mem::take(&mut elems[p]);
        for &e in &p_elems {
            if absorbed[e] {
                continue;
            }
            for &j in &elem_vars[e] {
                if !eliminated[j] && !in_lp[j] {
                    in_lp[j] = true;
                    lp.push(j);
                }
            }
            absorbed[e] = true;
            elem_vars[e] = Vec::new();
        }
        lp.sort_unstable();
        adj[p] = Vec::new();

        // prune variable lists and attach the new element
        for &i in &lp {
            adj[i].retain(|&j| !in_lp[j] && !eliminated[j]);
            elems[i].retain(|&e| !absorbed[e]);
            elems[i].push(p);
        }

        // |L_e \ L_p| for every element adjacent to L_p
        for &i in &lp {
            for &e in &elems[i] {
                if e == p {
                    continue;
                }
                if w_stamp[e] != step {
                    w_stamp[e] = step;
                    w[e] = elem_vars[e].len();
                }
                w[e] -= 1;
            }
        }

        let remaining = n - step - 1;
        let lp_ext = lp.len().saturating_sub(1);
        for &i in &lp {
            let mut bound = adj[i].len() + lp_ext;
            for &e in &elems[i] {
                if e != p {
                    bound += w[e];
                }
            }
            let d = remaining
                .saturating_sub(1)
                .min(degree[i] + lp_ext)
                .min(bound);
            if d != degree[i] {
                queue.remove(&(degree[i], orig[i], i));
                degree[i] = d;
                queue.insert((d, orig[i], i));
            }
        }

        in_lp[p] = false;
        for &i in &lp {
            in_lp[i] = false;
        }
        elem_vars[p] = lp;
    }

    Permutation::from_order(order)
}
