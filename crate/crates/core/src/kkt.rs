//! Saddle-point (KKT) systems from interior-point iterations.
//!
//! ```text
//! K = [ H + D_y + δ_p I   Jᵀ     ]
//!     [ J                 −δ_d I ]
//! ```
//!
//! Both diagonal blocks always store every diagonal slot, so the pattern of
//! `K` does not depend on the barrier parameter or the regularization.
//! Synthetic sequences keep `H` and `J` fixed and vary `D_y = μ Y⁻²` along a
//! geometric barrier schedule with a subset of `y` components tracking `μ`,
//! which drives the conditioning up as `μ` shrinks.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{mm, CooMatrix, CsrMatrix};

pub const DEFAULT_REGULARIZATION: f64 = 1e-8;

// Couplings stay within this index distance, which keeps the graph close to
// the banded, nearly planar structure of network problems.
const LOCALITY: usize = 12;

/// Blocks of one KKT matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KktBlocks {
    /// Symmetric `n x n` Hessian block.
    pub h: CsrMatrix,
    /// `m x n` constraint Jacobian.
    pub j: CsrMatrix,
    /// Diagonal of `D_y`, length `n`.
    pub d_y: Vec<f64>,
    pub mu: f64,
    pub delta_p: f64,
    pub delta_d: f64,
}

/// One system of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct KktSystem {
    pub index: usize,
    pub mu: f64,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Manufactured solution, when known.
    pub x_true: Option<Vec<f64>>,
    /// Source blocks, when the system was assembled here. Needed to
    /// re-assemble with stronger regularization.
    pub blocks: Option<KktBlocks>,
}

/// Identically patterned systems along a barrier schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct KktSequence {
    pub systems: Vec<KktSystem>,
    pub mu_schedule: Vec<f64>,
}

impl KktSequence {
    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    /// Pattern shared by every system.
    pub fn template(&self) -> Option<&CsrMatrix> {
        self.systems.first().map(|s| &s.matrix)
    }

    /// Index of the first system whose pattern differs from system 0.
    pub fn first_pattern_break(&self) -> Option<usize> {
        let first = self.template()?;
        self.systems
            .iter()
            .position(|s| !s.matrix.pattern_equal(first))
    }
}

/// Assembles `K` from its blocks. The right-hand side defaults to `K · 1`.
pub fn assemble_kkt(blocks: &KktBlocks) -> Result<KktSystem> {
    let matrix = assemble_matrix(blocks)?;
    let rhs = matrix.spmv(&vec![1.0; matrix.ncols])?;
    Ok(KktSystem {
        index: 0,
        mu: blocks.mu,
        matrix,
        rhs,
        x_true: None,
        blocks: Some(blocks.clone()),
    })
}

fn assemble_matrix(blocks: &KktBlocks) -> Result<CsrMatrix> {
    let KktBlocks { h, j, d_y, .. } = blocks;
    let n = h.nrows;
    if !h.is_square() {
        return Err(Error::NotSquare {
            nrows: h.nrows,
            ncols: h.ncols,
        });
    }
    if j.ncols != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: j.ncols,
        });
    }
    if d_y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: d_y.len(),
        });
    }
    for i in 0..n {
        for (c, v) in h.row(i) {
            if h.get(c, i) != Some(v) {
                return Err(Error::AsymmetricHessian { row: i, col: c });
            }
        }
    }
    let m = j.nrows;
    let mut coo = CooMatrix::with_capacity(n + m, n + m, h.nnz() + n + 2 * j.nnz() + m);
    for i in 0..n {
        let hii = h.get(i, i).unwrap_or(0.0);
        coo.push(i, i, hii + d_y[i] + blocks.delta_p);
        for (c, v) in h.row(i) {
            if c != i {
                coo.push(i, c, v);
            }
        }
    }
    for r in 0..m {
        for (c, v) in j.row(r) {
            coo.push(n + r, c, v);
            coo.push(c, n + r, v);
        }
        let d = if blocks.delta_d == 0.0 {
            0.0
        } else {
            -blocks.delta_d
        };
        coo.push(n + r, n + r, d);
    }
    coo.to_csr()
}

/// Parameters for synthetic sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceConfig {
    pub n: usize,
    pub m: usize,
    pub topology_seed: u64,
    pub mu0: f64,
    pub mu_min: f64,
    pub reduction: f64,
    pub delta_p: f64,
    pub delta_d: f64,
    pub y_seed: u64,
    /// Fixed length; `None` derives it from the schedule.
    pub systems: Option<usize>,
    /// Fraction of `y` components that track `μ`.
    pub active_fraction: f64,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self {
            n: 200,
            m: 80,
            topology_seed: 1,
            mu0: 1e-1,
            mu_min: 1e-7,
            reduction: 0.2,
            delta_p: DEFAULT_REGULARIZATION,
            delta_d: DEFAULT_REGULARIZATION,
            y_seed: 2,
            systems: None,
            active_fraction: 0.2,
        }
    }
}

impl SequenceConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n == 0 || self.m == 0 {
            return bad("n and m must be positive");
        }
        if self.m > self.n {
            return bad("m must not exceed n");
        }
        if !(self.mu0 > self.mu_min && self.mu_min > 0.0) {
            return bad("need mu0 > mu_min > 0");
        }
        if !(self.reduction > 0.0 && self.reduction < 1.0) {
            return bad("reduction factor must lie in (0, 1)");
        }
        if !(self.delta_p >= 0.0 && self.delta_d >= 0.0) {
            return bad("regularization must be nonnegative");
        }
        if self.systems == Some(0) {
            return bad("sequence length must be ≥ 1");
        }
        if !(0.0..=1.0).contains(&self.active_fraction) {
            return bad("active_fraction must lie in [0, 1]");
        }
        Ok(())
    }

    /// `μ_k = μ_0 · factorᵏ`, with the first value at or below `μ_min`
    /// clamped to `μ_min` and ending the schedule.
    pub fn mu_schedule(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0;
        loop {
            let mu = self.mu0 * self.reduction.powi(k);
            if let Some(len) = self.systems {
                if out.len() == len {
                    break;
                }
                out.push(mu.max(self.mu_min));
            } else if mu <= self.mu_min {
                out.push(self.mu_min);
                break;
            } else {
                out.push(mu);
            }
            k += 1;
        }
        out
    }
}

fn random_hessian(n: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(2 * n);
    for i in 0..n {
        if i + 1 < n {
            edges.push((i, i + 1));
        }
        let c = i + rng.gen_range(2..=LOCALITY);
        if c < n {
            edges.push((i, c));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut off_sum = vec![0.0f64; n];
    let mut coo = CooMatrix::with_capacity(n, n, 2 * edges.len() + n);
    for &(a, b) in &edges {
        let v: f64 = rng.gen_range(-1.0..1.0);
        coo.push(a, b, v);
        coo.push(b, a, v);
        off_sum[a] += v.abs();
        off_sum[b] += v.abs();
    }
    for (i, s) in off_sum.iter().enumerate() {
        coo.push(i, i, s + rng.gen_range(0.1..1.0));
    }
    coo.to_csr().expect("indices in range")
}

fn random_jacobian(n: usize, m: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let mut pivots: Vec<usize> = (0..n).collect();
    pivots.shuffle(rng);
    pivots.truncate(m);
    pivots.sort_unstable();
    let mut coo = CooMatrix::with_capacity(m, n, 3 * m);
    for (r, &pivot) in pivots.iter().enumerate() {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        coo.push(r, pivot, sign * rng.gen_range(1.0..2.0));
        for _ in 0..2 {
            let off = rng.gen_range(1..=LOCALITY);
            let c = if rng.gen_bool(0.5) {
                pivot.checked_sub(off)
            } else {
                Some(pivot + off).filter(|&c| c < n)
            };
            if let Some(c) = c {
                coo.push(r, c, rng.gen_range(-1.0..1.0));
            }
        }
    }
    // repeated columns are summed
    coo.to_csr().expect("indices in range")
}

/// Generates a fixed-pattern sequence with manufactured right-hand sides.
pub fn gen_sequence(config: &SequenceConfig) -> Result<KktSequence> {
    config.validate()?;
    let (n, m) = (config.n, config.m);
    let mut topo = ChaCha8Rng::seed_from_u64(config.topology_seed);
    let h = random_hessian(n, &mut topo);
    let j = random_jacobian(n, m, &mut topo);
    let n_active = (config.active_fraction * n as f64).round() as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut topo);
    let mut active = vec![false; n];
    for &i in idx.iter().take(n_active) {
        active[i] = true;
    }

    let schedule = config.mu_schedule();
    let mut systems = Vec::with_capacity(schedule.len());
    for (k, &mu) in schedule.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.y_seed.wrapping_add(k as u64));
        let d_y: Vec<f64> = (0..n)
            .map(|i| {
                let y = if active[i] {
                    mu * rng.gen_range(0.5..2.0)
                } else {
                    rng.gen_range(0.5..2.0)
                };
                mu / (y * y)
            })
            .collect();
        let blocks = KktBlocks {
            h: h.clone(),
            j: j.clone(),
            d_y,
            mu,
            delta_p: config.delta_p,
            delta_d: config.delta_d,
        };
        let matrix = assemble_matrix(&blocks)?;
        let x_true: Vec<f64> = (0..n + m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rhs = matrix.spmv(&x_true)?;
        systems.push(KktSystem {
            index: k,
            mu,
            matrix,
            rhs,
            x_true: Some(x_true),
            blocks: Some(blocks),
        });
    }
    Ok(KktSequence {
        systems,
        mu_schedule: schedule,
    })
}

/// Re-assembles `system` with both regularizations scaled by `factor`
/// (zero regularization becomes the default magnitude). The pattern is unchanged.
pub fn with_scaled_regularization(system: &KktSystem, factor: f64) -> Option<KktSystem> {
    let mut blocks = system.blocks.clone()?;
    let bump = |d: f64| {
        if d == 0.0 {
            DEFAULT_REGULARIZATION
        } else {
            d * factor
        }
    };
    blocks.delta_p = bump(blocks.delta_p);
    blocks.delta_d = bump(blocks.delta_d);
    let matrix = assemble_matrix(&blocks).ok()?;
    Some(KktSystem {
        matrix,
        blocks: Some(blocks),
        ..system.clone()
    })
}

/// One manifest line: matrix file and optional right-hand side file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub matrix: PathBuf,
    pub rhs: Option<PathBuf>,
}

/// Parses a manifest: one matrix filename per line with an optional second
/// column naming the right-hand side. Blank lines and `#` comments are skipped.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [m] => out.push(ManifestEntry {
                matrix: PathBuf::from(m),
                rhs: None,
            }),
            [m, r] => out.push(ManifestEntry {
                matrix: PathBuf::from(m),
                rhs: Some(PathBuf::from(r)),
            }),
            _ => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "expected `matrix.mtx [rhs.mtx]`".into(),
                })
            }
        }
    }
    Ok(out)
}

/// Loads a sequence from a manifest; paths are relative to its directory.
/// Every system must share the pattern of the first.
pub fn load_sequence(manifest: impl AsRef<Path>) -> Result<KktSequence> {
    let systems = load_systems(manifest)?;
    if let Some(first) = systems.first() {
        if let Some(k) = systems
            .iter()
            .position(|s| !s.matrix.pattern_equal(&first.matrix))
        {
            return Err(Error::SequencePatternMismatch(k));
        }
    }
    Ok(KktSequence {
        systems,
        mu_schedule: Vec::new(),
    })
}

/// Like [`load_sequence`] but accepts pattern changes between systems, for
/// drivers that re-analyze when the pattern breaks.
pub fn load_systems(manifest: impl AsRef<Path>) -> Result<Vec<KktSystem>> {
    let manifest = manifest.as_ref();
    let text = fs::read_to_string(manifest).map_err(|source| Error::Io {
        path: manifest.to_path_buf(),
        source,
    })?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let entries = parse_manifest(&text)?;
    if entries.is_empty() {
        return Err(Error::InvalidConfig("sequence length must be ≥ 1".into()));
    }
    let mut systems = Vec::with_capacity(entries.len());
    for (k, entry) in entries.iter().enumerate() {
        let matrix = mm::mm_read(dir.join(&entry.matrix))?.to_csr()?;
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                nrows: matrix.nrows,
                ncols: matrix.ncols,
            });
        }
        let rhs = match &entry.rhs {
            Some(p) => {
                let v = mm::read_vector(dir.join(p))?;
                if v.len() != matrix.nrows {
                    return Err(Error::DimensionMismatch {
                        expected: matrix.nrows,
                        found: v.len(),
                    });
                }
                v
            }
            None => matrix.spmv(&vec![1.0; matrix.ncols])?,
        };
        systems.push(KktSystem {
            index: k,
            mu: f64::NAN,
            matrix,
            rhs,
            x_true: None,
            blocks: None,
        });
    }
    Ok(systems)
}

/// Writes each system as `kkt_XXX.mtx` + `rhs_XXX.mtx` plus a `manifest.txt`.
/// Returns the manifest path.
pub fn write_sequence(seq: &KktSequence, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut manifest = String::new();
    for s in &seq.systems {
        let mname = format!("kkt_{:03}.mtx", s.index);
        let rname = format!("rhs_{:03}.mtx", s.index);
        mm::mm_write(&s.matrix, dir.join(&mname))?;
        mm::write_vector(&s.rhs, dir.join(&rname))?;
        manifest.push_str(&format!("{mname} {rname}\n"));
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
