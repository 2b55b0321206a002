//! Iterative refinement of direct solutions.
//!
//! The default method is right-preconditioned flexible GMRES with the LU
//! factors as preconditioner, started from the direct solution. Arnoldi
//! vectors are orthogonalized with two passes of classical Gram-Schmidt.
//! There is no restart; the Krylov dimension is capped by `max_iterations`.
//! Classic refinement (`x += M⁻¹ (b - A x)`) is kept for comparison.

use crate::error::Result;
use crate::numeric::NumericFactors;
use crate::sparse::{dot, norm2, CsrMatrix};
use crate::trisolve::{solve_into, SolveWorkspace};

pub const DEFAULT_MAX_ITERATIONS: usize = 20;
pub const DEFAULT_TOLERANCE: f64 = 1e-14;
const BREAKDOWN_NORM: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RefineMethod {
    #[default]
    Fgmres,
    Classic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    pub max_iterations: usize,
    /// Target for `‖b - A x‖₂ / ‖b‖₂`.
    pub tolerance: f64,
    pub enabled: bool,
    pub method: RefineMethod,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: DEFAULT_TOLERANCE,
            enabled: true,
            method: RefineMethod::Fgmres,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(crate::Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(crate::Error::InvalidConfig(
                "tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual per iterate. Entry 0 is the true residual of the
    /// starting point; later entries are the least-squares residuals of the
    /// Krylov iterates (classic refinement records true residuals).
    pub residual_history: Vec<f64>,
    /// True relative residual of `x`.
    pub final_residual: f64,
    pub converged: bool,
}

/// A linear map `y = Op(x)`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

impl LinearOperator for &CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.spmv_into(x, y)
    }
}

/// Identity preconditioner.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        y.copy_from_slice(x);
        Ok(())
    }
}

/// Applies `A⁻¹` through existing LU factors.
pub struct LuPreconditioner<'a> {
    pub factors: &'a NumericFactors,
    pub workspace: &'a mut SolveWorkspace,
}

impl LinearOperator for LuPreconditioner<'_> {
    fn dim(&self) -> usize {
        self.factors.symbolic().n()
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        solve_into(self.factors, x, y, self.workspace)
    }
}

/// Result of orthogonalizing one vector against an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub enum Cgs2 {
    Orthonormal {
        coefficients: Vec<f64>,
        vector: Vec<f64>,
        norm: f64,
    },
    /// The vector lies in the span of the basis (remaining norm ≤ 1e-300).
    Breakdown { coefficients: Vec<f64>, norm: f64 },
}

/// Orthogonalizes `v` against `basis` with two classical Gram-Schmidt passes
/// and normalizes the remainder. Coefficients are the sum of both passes.
pub fn cgs2_orthonormalize(basis: &[Vec<f64>], v: &[f64]) -> Cgs2 {
    let mut w = v.to_vec();
    let mut h = vec![0.0; basis.len()];
    let mut scratch = vec![0.0; basis.len()];
    let norm = cgs2_in_place(basis, &mut w, &mut h, &mut scratch);
    if norm <= BREAKDOWN_NORM {
        Cgs2::Breakdown {
            coefficients: h,
            norm,
        }
    } else {
        w.iter_mut().for_each(|x| *x /= norm);
        Cgs2::Orthonormal {
            coefficients: h,
            vector: w,
            norm,
        }
    }
}

// Returns the norm of the projected-out vector; `w` is left unnormalized.
fn cgs2_in_place(basis: &[Vec<f64>], w: &mut [f64], h: &mut [f64], scratch: &mut [f64]) -> f64 {
    h.iter_mut().for_each(|x| *x = 0.0);
    for _pass in 0..2 {
        for (c, q) in scratch.iter_mut().zip(basis) {
            *c = dot(q, w);
        }
        for (c, q) in scratch.iter().zip(basis) {
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
        for (hi, c) in h.iter_mut().zip(scratch.iter()) {
            *hi += c;
        }
    }
    norm2(w)
}

fn residual(a: &mut impl LinearOperator, b: &[f64], x: &[f64], r: &mut [f64]) -> Result<f64> {
    a.apply(x, r)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    Ok(norm2(r))
}

/// Reusable FGMRES state; Krylov storage is allocated once per size.
#[derive(Debug, Default)]
pub struct Fgmres {
    n: usize,
    max_iterations: usize,
    v: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    // column-major Hessenberg, (max_iterations + 1) x max_iterations
    h: Vec<f64>,
    cs: Vec<f64>,
    sn: Vec<f64>,
    g: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
    r: Vec<f64>,
    scratch: Vec<f64>,
    trial: Vec<f64>,
}

impl Fgmres {
    pub fn new(n: usize, max_iterations: usize) -> Self {
        let mut s = Self::default();
        s.resize(n, max_iterations);
        s
    }

    fn resize(&mut self, n: usize, m: usize) {
        if self.n == n && self.max_iterations == m {
            return;
        }
        self.n = n;
        self.max_iterations = m;
        self.v = vec![vec![0.0; n]; m + 1];
        self.z = vec![vec![0.0; n]; m];
        self.h = vec![0.0; (m + 1) * m];
        self.cs = vec![0.0; m];
        self.sn = vec![0.0; m];
        self.g = vec![0.0; m + 1];
        self.y = vec![0.0; m];
        self.w = vec![0.0; n];
        self.r = vec![0.0; n];
        self.scratch = vec![0.0; m + 1];
        self.trial = vec![0.0; n];
    }

    /// Largest off-diagonal inner product among the basis vectors built by
    /// the last call to [`Fgmres::solve`].
    pub fn basis_orthogonality(&self, basis_len: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..basis_len {
            for j in 0..i {
                worst = worst.max(dot(&self.v[i], &self.v[j]).abs());
            }
        }
        worst
    }

    /// Runs FGMRES from `x0`.
    pub fn solve(
        &mut self,
        a: &mut impl LinearOperator,
        precond: &mut impl LinearOperator,
        b: &[f64],
        x0: &[f64],
        config: &RefineConfig,
    ) -> Result<RefineOutcome> {
        config.validate()?;
        let n = b.len();
        self.resize(n, config.max_iterations);
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok(RefineOutcome {
                x: vec![0.0; n],
                iterations: 0,
                residual_history: vec![0.0],
                final_residual: 0.0,
                converged: true,
            });
        }

        let beta = residual(a, b, x0, &mut self.r)?;
        let rel0 = beta / bnorm;
        let mut out = RefineOutcome {
            x: x0.to_vec(),
            iterations: 0,
            residual_history: vec![rel0],
            final_residual: rel0,
            converged: rel0 <= config.tolerance,
        };
        if out.converged || !rel0.is_finite() {
            return Ok(out);
        }

        let m = config.max_iterations;
        let ld = m + 1;
        for (vi, ri) in self.v[0].iter_mut().zip(&self.r) {
            *vi = ri / beta;
        }
        self.g.iter_mut().for_each(|x| *x = 0.0);
        self.g[0] = beta;

        for k in 0..m {
            precond.apply(&self.v[k], &mut self.z[k])?;
            a.apply(&self.z[k], &mut self.w)?;

            let (basis, rest) = self.v.split_at_mut(k + 1);
            let col = &mut self.h[k * ld..(k + 1) * ld];
            let hnext = cgs2_in_place(
                basis,
                &mut self.w,
                &mut col[..k + 1],
                &mut self.scratch[..k + 1],
            );
            col[k + 1] = hnext;
            let breakdown = hnext <= BREAKDOWN_NORM;
            if !breakdown {
                for (vi, wi) in rest[0].iter_mut().zip(&self.w) {
                    *vi = wi / hnext;
                }
            }

            for i in 0..k {
                let t = self.cs[i] * col[i] + self.sn[i] * col[i + 1];
                col[i + 1] = -self.sn[i] * col[i] + self.cs[i] * col[i + 1];
                col[i] = t;
            }
            let (c, s) = givens(col[k], col[k + 1]);
            self.cs[k] = c;
            self.sn[k] = s;
            col[k] = c * col[k] + s * col[k + 1];
            col[k + 1] = 0.0;
            self.g[k + 1] = -s * self.g[k];
            self.g[k] *= c;

            let estimate = self.g[k + 1].abs() / bnorm;
            out.iterations = k + 1;
            out.residual_history.push(estimate);

            let last = k + 1 == m;
            if estimate <= config.tolerance || breakdown || last || !estimate.is_finite() {
                let true_rel = self.form_iterate(a, b, x0, k + 1, ld, bnorm)?;
                if true_rel < out.final_residual {
                    out.x.copy_from_slice(&self.trial);
                    out.final_residual = true_rel;
                }
                if true_rel <= config.tolerance || breakdown || !estimate.is_finite() {
                    break;
                }
            }
        }
        out.converged = out.final_residual <= config.tolerance;
        Ok(out)
    }

    // x = x0 + Z y with y from the rotated Hessenberg system; returns the
    // true relative residual of that iterate, left in `trial`.
    fn form_iterate(
        &mut self,
        a: &mut impl LinearOperator,
        b: &[f64],
        x0: &[f64],
        k: usize,
        ld: usize,
        bnorm: f64,
    ) -> Result<f64> {
        for i in (0..k).rev() {
            let mut s = self.g[i];
            for j in i + 1..k {
                s -= self.h[j * ld + i] * self.y[j];
            }
            self.y[i] = s / self.h[i * ld + i];
        }
        self.trial.copy_from_slice(x0);
        for j in 0..k {
            let yj = self.y[j];
            for (t, zj) in self.trial.iter_mut().zip(&self.z[j]) {
                *t += yj * zj;
            }
        }
        let rn = residual(a, b, &self.trial, &mut self.r)?;
        Ok(rn / bnorm)
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// FGMRES refinement with fresh workspace.
pub fn fgmres_refine(
    mut a: impl LinearOperator,
    b: &[f64],
    x0: &[f64],
    mut precond: impl LinearOperator,
    config: &RefineConfig,
) -> Result<RefineOutcome> {
    Fgmres::new(b.len(), config.max_iterations).solve(&mut a, &mut precond, b, x0, config)
}

/// Classic refinement: `x ← x + M⁻¹ (b − A x)` until the tolerance or the
/// iteration cap is reached. Returns the best iterate.
pub fn classic_refine(
    mut a: impl LinearOperator,
    b: &[f64],
    x0: &[f64],
    mut precond: impl LinearOperator,
    config: &RefineConfig,
) -> Result<RefineOutcome> {
    config.validate()?;
    let n = b.len();
    let bnorm = norm2(b);
    let mut r = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut x = x0.to_vec();
    if bnorm == 0.0 {
        return Ok(RefineOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residual_history: vec![0.0],
            final_residual: 0.0,
            converged: true,
        });
    }
    let mut rel = residual(&mut a, b, &x, &mut r)? / bnorm;
    let mut out = RefineOutcome {
        x: x.clone(),
        iterations: 0,
        residual_history: vec![rel],
        final_residual: rel,
        converged: false,
    };
    while rel > config.tolerance && out.iterations < config.max_iterations && rel.is_finite() {
        precond.apply(&r, &mut d)?;
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
        rel = residual(&mut a, b, &x, &mut r)? / bnorm;
        out.iterations += 1;
        out.residual_history.push(rel);
        if rel < out.final_residual {
            out.final_residual = rel;
            out.x.copy_from_slice(&x);
        }
    }
    out.converged = out.final_residual <= config.tolerance;
    Ok(out)
}
