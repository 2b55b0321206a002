//! Reference implementations and random inputs shared by the integration
//! tests. Everything here is deliberately naive: dense storage, brute-force
//! enumeration, no reuse of library internals beyond the container types.

#![allow(dead_code)]

use std::collections::BTreeSet;

use kktlu::kkt::{gen_sequence, SequenceConfig};
use kktlu::{CooMatrix, CsrMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Right-looking dense LU without pivoting. Returns `(L, U)` with unit `L`.
pub fn dense_lu(a: &Dense) -> (Dense, Dense) {
    let n = a.len();
    let mut u = a.clone();
    let mut l = vec![vec![0.0; n]; n];
    for k in 0..n {
        l[k][k] = 1.0;
        for i in k + 1..n {
            if u[i][k] == 0.0 {
                continue;
            }
            let f = u[i][k] / u[k][k];
            l[i][k] = f;
            u[i][k] = 0.0;
            for j in k + 1..n {
                u[i][j] -= f * u[k][j];
            }
        }
    }
    (l, u)
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let p = b[0].len();
    let mut c = vec![vec![0.0; p]; n];
    for i in 0..n {
        for k in 0..b.len() {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..p {
                    c[i][j] += aik * b[k][j];
                }
            }
        }
    }
    c
}

pub fn frobenius(a: &Dense) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn sub(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn rel_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.spmv(x).unwrap();
    let r: f64 = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt();
    r / b.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest `Σ log|a_{i,σ(i)}|` over all permutations, by enumeration.
/// `None` when every permutation hits a zero.
pub fn max_log_product(a: &Dense) -> Option<f64> {
    fn go(a: &Dense, row: usize, used: &mut [bool], acc: f64, best: &mut Option<f64>) {
        let n = a.len();
        if row == n {
            if best.map_or(true, |b| acc > b) {
                *best = Some(acc);
            }
            return;
        }
        for j in 0..n {
            if !used[j] && a[row][j] != 0.0 {
                used[j] = true;
                go(a, row + 1, used, acc + a[row][j].abs().ln(), best);
                used[j] = false;
            }
        }
    }
    let mut best = None;
    go(a, 0, &mut vec![false; a.len()], 0.0, &mut best);
    best
}

/// Symbolic Gaussian elimination in natural order: for each pivot `k`, every
/// row with an entry in column `k` below the pivot absorbs the upper part of
/// row `k`. No cancellation.
pub fn symbolic_elimination(pattern: &CsrMatrix) -> Vec<BTreeSet<usize>> {
    let n = pattern.nrows;
    let mut rows: Vec<BTreeSet<usize>> = (0..n)
        .map(|i| pattern.row_cols(i).iter().copied().collect())
        .collect();
    for k in 0..n {
        let upper: Vec<usize> = rows[k].range(k + 1..).copied().collect();
        for i in k + 1..n {
            if rows[i].contains(&k) {
                rows[i].extend(upper.iter().copied());
            }
        }
    }
    rows
}

pub fn pattern_sets(m: &CsrMatrix) -> Vec<BTreeSet<usize>> {
    (0..m.nrows)
        .map(|i| m.row_cols(i).iter().copied().collect())
        .collect()
}

/// Random square pattern with a full diagonal; values are 1.
pub fn random_pattern(n: usize, density: f64, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let mut coo = CooMatrix::new(n, n);
    for i in 0..n {
        coo.push(i, i, 1.0);
        for j in 0..n {
            if j != i && rng.gen_bool(density) {
                coo.push(i, j, 1.0);
            }
        }
    }
    coo.to_csr().unwrap()
}

/// Random sparse matrix with about `per_row` off-diagonal entries per row and
/// a strictly dominant diagonal, so pivot-free LU is stable in any symmetric
/// order.
pub fn diag_dominant(n: usize, per_row: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let mut coo = CooMatrix::new(n, n);
    let mut row_sum = vec![0.0f64; n];
    for i in 0..n {
        for _ in 0..per_row {
            let j = rng.gen_range(0..n);
            if j != i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                coo.push(i, j, v);
                row_sum[i] += v.abs();
            }
        }
    }
    for i in 0..n {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        coo.push(i, i, sign * (row_sum[i] + rng.gen_range(0.5..2.0)));
    }
    coo.to_csr().unwrap()
}

/// Same pattern as `a`, fresh values, still diagonally dominant.
pub fn revalue(a: &CsrMatrix, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let mut out = a.clone();
    for i in 0..a.nrows {
        let mut off = 0.0;
        let mut diag = None;
        for k in a.row_range(i) {
            if a.col_indices[k] == i {
                diag = Some(k);
            } else {
                let v: f64 = rng.gen_range(-1.0..1.0);
                out.values[k] = v;
                off += v.abs();
            }
        }
        let k = diag.expect("diagonal present");
        out.values[k] = off + rng.gen_range(0.5..2.0);
    }
    out
}

/// Random structurally nonsingular matrix whose magnitudes span several
/// orders, with the large entries hidden off the diagonal.
pub fn random_unsymmetric(n: usize, density: f64, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut coo = CooMatrix::new(n, n);
    let mag = |rng: &mut ChaCha8Rng| {
        let e: f64 = rng.gen_range(-3.0..3.0);
        let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        s * 10f64.powf(e)
    };
    for i in 0..n {
        coo.push(i, perm[i], mag(rng));
        for j in 0..n {
            if j != perm[i] && rng.gen_bool(density) {
                coo.push(i, j, mag(rng));
            }
        }
    }
    coo.to_csr().unwrap()
}

/// Symmetric pattern of a random tree on `n` vertices, with diagonal.
pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let mut coo = CooMatrix::new(n, n);
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    for i in 0..n {
        coo.push(i, i, 4.0);
    }
    for k in 1..n {
        let parent = label[rng.gen_range(0..k)];
        coo.push(label[k], parent, 1.0);
        coo.push(parent, label[k], 1.0);
    }
    coo.to_csr().unwrap()
}

/// Systems used for the schedule-determinism and solve checks: random
/// dominant matrices of several sizes plus a few small KKT matrices.
pub fn corpus() -> Vec<CsrMatrix> {
    let mut r = rng(0xC0FFEE);
    let mut out = Vec::new();
    for &n in &[1usize, 2, 5, 17, 64, 150, 300] {
        out.push(diag_dominant(n, 5, &mut r));
    }
    out.push(random_tree(200, &mut r));
    for (n, m) in [(30, 10), (120, 50)] {
        let seq = gen_sequence(&SequenceConfig {
            n,
            m,
            systems: Some(3),
            ..SequenceConfig::default()
        })
        .unwrap();
        out.extend(seq.systems.into_iter().map(|s| s.matrix));
    }
    out
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn dense_inverse(a: &Dense) -> Dense {
    let n = a.len();
    let mut m: Dense = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| m[x][k].abs().total_cmp(&m[y][k].abs()))
            .unwrap();
        m.swap(k, p);
        let piv = m[k][k];
        for v in m[k].iter_mut() {
            *v /= piv;
        }
        for i in 0..n {
            if i != k && m[i][k] != 0.0 {
                let f = m[i][k];
                let rk = m[k].clone();
                for (v, w) in m[i].iter_mut().zip(&rk) {
                    *v -= f * w;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// 1-norm condition number.
pub fn condition_1(a: &Dense) -> f64 {
    let norm1 = |m: &Dense| {
        (0..m.len())
            .map(|j| m.iter().map(|r| r[j].abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
    };
    norm1(a) * norm1(&dense_inverse(a))
}
