mod common;

use std::sync::Arc;

use kktlu::refine::{
    cgs2_orthonormalize, classic_refine, Cgs2, Fgmres, Identity, LuPreconditioner, RefineConfig,
    RefineMethod,
};
use kktlu::{
    factorize, solve_system, symbolic_analyze, AnalyzeOptions, CsrMatrix, FactorOptions,
    SolveWorkspace,
};
use proptest::prelude::*;
use rand::Rng;

fn rhs(a: &CsrMatrix, r: &mut impl Rng) -> Vec<f64> {
    let x: Vec<f64> = (0..a.ncols).map(|_| r.gen_range(-1.0..1.0)).collect();
    a.spmv(&x).unwrap()
}

fn nonincreasing(h: &[f64]) -> bool {
    h.windows(2).all(|w| w[1] <= w[0])
}

#[test]
fn exact_preconditioner_converges_in_one_iteration() {
    let mut r = common::rng(31);
    for a in common::corpus() {
        let s = Arc::new(symbolic_analyze(&a, AnalyzeOptions::default()).unwrap());
        let f = factorize(&s, &a, FactorOptions::default()).unwrap();
        let b = rhs(&a, &mut r);
        let mut ws = SolveWorkspace::default();
        let direct = common::rel_residual(&a, &solve_system(&f, &b, &mut ws).unwrap(), &b);

        let cfg = RefineConfig::default();
        let mut solver = Fgmres::new(a.nrows, cfg.max_iterations);
        let x0 = vec![0.0; a.nrows];
        let mut pre = LuPreconditioner {
            factors: &f,
            workspace: &mut ws,
        };
        let out = solver.solve(&mut &a, &mut pre, &b, &x0, &cfg).unwrap();
        let one = common::rel_residual(&a, &out.x, &b);
        assert!(out.iterations <= 2, "took {} iterations", out.iterations);
        assert!(out.converged && out.final_residual <= cfg.tolerance);
        assert!(one <= cfg.tolerance.max(100.0 * direct));
        assert!(nonincreasing(&out.residual_history));
        assert!(solver.basis_orthogonality(out.iterations) <= 1e-12);
    }
}

#[test]
fn identity_preconditioner_contracts() {
    let mut r = common::rng(32);
    for _ in 0..40 {
        let n = r.gen_range(2..=60);
        let a = common::diag_dominant(n, 3, &mut r);
        let b = rhs(&a, &mut r);
        let x0: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let cfg = RefineConfig {
            max_iterations: 15,
            tolerance: 1e-12,
            ..RefineConfig::default()
        };
        let mut solver = Fgmres::new(n, cfg.max_iterations);
        let out = solver
            .solve(&mut &a, &mut Identity(n), &b, &x0, &cfg)
            .unwrap();
        assert!(
            nonincreasing(&out.residual_history),
            "{:?}",
            out.residual_history
        );
        assert!(solver.basis_orthogonality(out.iterations) <= 1e-12);
        // never worse than the starting point
        assert!(out.final_residual <= out.residual_history[0]);
        assert!((common::rel_residual(&a, &out.x, &b) - out.final_residual).abs() <= 1e-15);
    }
}

#[test]
fn classic_refinement_never_degrades() {
    let mut r = common::rng(33);
    for _ in 0..20 {
        let n = r.gen_range(2..=100);
        let a = common::diag_dominant(n, 4, &mut r);
        let s = Arc::new(symbolic_analyze(&a, AnalyzeOptions::default()).unwrap());
        let f = factorize(&s, &a, FactorOptions::default()).unwrap();
        let b = rhs(&a, &mut r);
        let mut ws = SolveWorkspace::default();
        let x0 = vec![0.0; n];
        let cfg = RefineConfig {
            method: RefineMethod::Classic,
            ..RefineConfig::default()
        };
        let out = classic_refine(
            &a,
            &b,
            &x0,
            LuPreconditioner {
                factors: &f,
                workspace: &mut ws,
            },
            &cfg,
        )
        .unwrap();
        assert!(out.final_residual <= out.residual_history[0]);
        assert!(out.final_residual <= 1e-10);
    }
}

proptest! {
    #[test]
    fn cgs2_produces_orthonormal_vectors(n in 3usize..40, k in 1usize..8, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for _ in 0..k.min(n) {
            let v: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
            if let Cgs2::Orthonormal { vector, .. } = cgs2_orthonormalize(&basis, &v) {
                basis.push(vector);
            }
        }
        for i in 0..basis.len() {
            let nrm: f64 = basis[i].iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((nrm - 1.0).abs() <= 1e-12);
            for j in 0..i {
                let d: f64 = basis[i].iter().zip(&basis[j]).map(|(p, q)| p * q).sum();
                prop_assert!(d.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn fgmres_history_is_monotone(n in 2usize..40, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let a = common::diag_dominant(n, 3, &mut r);
        let b = rhs(&a, &mut r);
        let cfg = RefineConfig { max_iterations: 10, tolerance: 1e-13, ..RefineConfig::default() };
        let mut solver = Fgmres::new(n, cfg.max_iterations);
        let out = solver.solve(&mut &a, &mut Identity(n), &b, &vec![0.0; n], &cfg).unwrap();
        prop_assert!(nonincreasing(&out.residual_history));
        prop_assert!(out.final_residual <= out.residual_history[0]);
        prop_assert!(solver.basis_orthogonality(out.iterations) <= 1e-12);
    }
}
