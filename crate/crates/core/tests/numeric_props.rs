mod common;

use std::sync::Arc;

use kktlu::trisolve::{lower_solve, upper_solve};
use kktlu::{
    factorize, solve_system, symbolic_analyze, AnalyzeOptions, CsrMatrix, Error, Execution,
    FactorOptions, NumericFactors, SolveWorkspace,
};
use rand::Rng;

fn analyze(a: &CsrMatrix) -> Arc<kktlu::SymbolicFactors> {
    Arc::new(symbolic_analyze(a, AnalyzeOptions::default()).unwrap())
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn factor_residual(f: &NumericFactors, b: &CsrMatrix) -> f64 {
    let lu = common::matmul(&f.l_factor().to_dense(), &f.u_factor().to_dense());
    let bd = b.to_dense();
    common::frobenius(&common::sub(&bd, &lu)) / common::frobenius(&bd)
}

#[test]
fn factor_residual_on_100_dominant_systems() {
    let mut r = common::rng(21);
    for t in 0..100 {
        let n = r.gen_range(1..=300);
        let a = common::diag_dominant(n, 5, &mut r);
        let s = analyze(&a);
        let f = factorize(&s, &a, FactorOptions::default()).unwrap();
        let b = s.transform(&a).unwrap();
        let res = factor_residual(&f, &b);
        assert!(res <= 1e-13, "case {t}: residual {res:e}");
    }
}

#[test]
fn agrees_with_dense_lu_on_transformed_matrix() {
    let mut r = common::rng(22);
    for t in 0..60 {
        let n = r.gen_range(1..=50);
        let a = common::diag_dominant(n, 4, &mut r);
        let s = analyze(&a);
        let f = factorize(&s, &a, FactorOptions::default()).unwrap();
        let b = s.transform(&a).unwrap().to_dense();
        let (l, u) = common::dense_lu(&b);
        let bmax = common::max_abs(&b);
        let dl = common::max_abs(&common::sub(&l, &f.l_factor().to_dense()));
        let du = common::max_abs(&common::sub(&u, &f.u_factor().to_dense()));
        assert!(dl.max(du) <= 1e-12 * bmax, "case {t}: {dl:e} {du:e}");
    }
}

#[test]
fn refactorize_is_bitwise_factorize_over_50_sequences() {
    let mut r = common::rng(23);
    for _ in 0..50 {
        let n = r.gen_range(1..=120);
        let a0 = common::diag_dominant(n, 4, &mut r);
        let s = analyze(&a0);
        let mut f = factorize(&s, &a0, FactorOptions::default()).unwrap();
        for k in 1..10 {
            let ak = common::revalue(&a0, &mut r);
            f.refactorize(&ak).unwrap();
            let fresh = factorize(&s, &ak, FactorOptions::default()).unwrap();
            assert_eq!(bits(f.values()), bits(fresh.values()));
            assert_eq!(f.generation(), k + 1);
        }
    }
}

#[test]
fn scheduled_execution_is_bitwise_sequential() {
    let mut r = common::rng(24);
    for a in common::corpus() {
        let s = analyze(&a);
        let seq = factorize(&s, &a, FactorOptions::default()).unwrap();
        let b: Vec<f64> = (0..a.nrows).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut ws = SolveWorkspace::default();
        let x_seq = solve_system(&seq, &b, &mut ws).unwrap();
        for w in [2, 4, 8] {
            for exec in [
                Execution::scheduled(w),
                Execution::scheduled(w).with_jitter(w as u64),
            ] {
                let opts = FactorOptions {
                    execution: exec,
                    ..FactorOptions::default()
                };
                let par = factorize(&s, &a, opts).unwrap();
                assert_eq!(bits(par.values()), bits(seq.values()));
                let x_par = solve_system(&par, &b, &mut ws).unwrap();
                assert_eq!(bits(&x_par), bits(&x_seq));
                let y = lower_solve(&seq, &b, exec).unwrap();
                assert_eq!(
                    bits(&y),
                    bits(&lower_solve(&seq, &b, Execution::sequential()).unwrap())
                );
                let z = upper_solve(&seq, &y, exec).unwrap();
                assert_eq!(
                    bits(&z),
                    bits(&upper_solve(&seq, &y, Execution::sequential()).unwrap())
                );
            }
        }
    }
}

#[test]
fn manufactured_solutions_are_accurate() {
    let mut r = common::rng(25);
    let mut ws = SolveWorkspace::default();
    for _ in 0..60 {
        let n = r.gen_range(1..=300);
        let a = common::diag_dominant(n, 5, &mut r);
        let s = analyze(&a);
        let f = factorize(&s, &a, FactorOptions::default()).unwrap();
        let x_true: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let b = a.spmv(&x_true).unwrap();
        let x = solve_system(&f, &b, &mut ws).unwrap();
        assert!(common::rel_residual(&a, &x, &b) <= 1e-10);
    }
}

#[test]
fn identity_stages_reduce_to_triangular_solves() {
    let mut r = common::rng(26);
    let plain = AnalyzeOptions {
        use_scaling: false,
        use_amd: false,
    };
    for _ in 0..20 {
        let n = r.gen_range(1..=100);
        let a = common::diag_dominant(n, 4, &mut r);
        let s = Arc::new(symbolic_analyze(&a, plain).unwrap());
        let f = factorize(&s, &a, FactorOptions::default()).unwrap();
        let b: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let seq = Execution::sequential();
        let expect = upper_solve(&f, &lower_solve(&f, &b, seq).unwrap(), seq).unwrap();
        let x = solve_system(&f, &b, &mut SolveWorkspace::default()).unwrap();
        assert_eq!(bits(&x), bits(&expect));
    }
}

#[test]
fn zero_pivot_reports_lowest_row_in_every_mode() {
    // rows 1 and 3 become exactly singular after elimination
    let a = CsrMatrix::from_dense(&[
        vec![1.0, 1.0, 0.0, 0.0],
        vec![1.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 2.0, 2.0],
        vec![0.0, 0.0, 2.0, 2.0],
    ]);
    let plain = AnalyzeOptions {
        use_scaling: false,
        use_amd: false,
    };
    let s = Arc::new(symbolic_analyze(&a, plain).unwrap());
    for exec in [
        Execution::sequential(),
        Execution::scheduled(4),
        Execution::scheduled(4).with_jitter(9),
    ] {
        let opts = FactorOptions {
            execution: exec,
            ..FactorOptions::default()
        };
        assert!(matches!(factorize(&s, &a, opts), Err(Error::ZeroPivot(1))));
    }
}
