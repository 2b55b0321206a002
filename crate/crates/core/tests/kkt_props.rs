mod common;

use std::sync::Arc;

use kktlu::kkt::{
    assemble_kkt, gen_sequence, load_sequence, write_sequence, KktBlocks, SequenceConfig,
};
use kktlu::refine::{fgmres_refine, LuPreconditioner, RefineConfig};
use kktlu::{
    factorize, solve_system, symbolic_analyze, AnalyzeOptions, CooMatrix, Error, FactorOptions,
    SolveWorkspace,
};
use proptest::prelude::*;
use rand::Rng;

fn small(n: usize, m: usize, seed: u64) -> SequenceConfig {
    SequenceConfig {
        n,
        m,
        topology_seed: seed,
        y_seed: seed ^ 0xA5,
        ..SequenceConfig::default()
    }
}

fn is_bitwise_symmetric(a: &kktlu::CsrMatrix) -> bool {
    let t = a.transpose();
    t.pattern_equal(a)
        && t.values
            .iter()
            .zip(&a.values)
            .all(|(p, q)| p.to_bits() == q.to_bits())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generated_systems_are_symmetric_with_shared_pattern(
        n in 2usize..80, frac in 0.1f64..1.0, seed in any::<u64>()
    ) {
        let m = ((n as f64 * frac) as usize).clamp(1, n);
        let seq = gen_sequence(&small(n, m, seed)).unwrap();
        prop_assert_eq!(seq.len(), seq.mu_schedule.len());
        prop_assert_eq!(seq.first_pattern_break(), None);
        for s in &seq.systems {
            prop_assert!(is_bitwise_symmetric(&s.matrix));
            prop_assert_eq!(s.matrix.nrows, n + m);
            for i in 0..n + m {
                prop_assert!(s.matrix.get(i, i).is_some());
            }
        }
    }

    #[test]
    fn assembled_matrix_is_symmetric(n in 1usize..20, m in 1usize..10, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let mut h = CooMatrix::new(n, n);
        for i in 0..n {
            for j in 0..=i {
                if r.gen_bool(0.3) {
                    let v = r.gen_range(-1.0..1.0);
                    h.push(i, j, v);
                    if i != j { h.push(j, i, v); }
                }
            }
        }
        let mut j = CooMatrix::new(m, n);
        for i in 0..m {
            for c in 0..n {
                if r.gen_bool(0.3) { j.push(i, c, r.gen_range(-1.0..1.0)); }
            }
        }
        let blocks = KktBlocks {
            h: h.to_csr().unwrap(),
            j: j.to_csr().unwrap(),
            d_y: (0..n).map(|_| r.gen_range(0.0..1.0)).collect(),
            mu: 0.1,
            delta_p: 1e-8,
            delta_d: r.gen_range(0.0..1e-6),
        };
        let k = assemble_kkt(&blocks).unwrap().matrix;
        prop_assert!(is_bitwise_symmetric(&k));
        prop_assert_eq!(k.nnz(),
            blocks.h.nnz() + (0..n).filter(|&i| blocks.h.get(i, i).is_none()).count()
            + 2 * blocks.j.nnz() + m);
    }
}

#[test]
fn written_sequences_load_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    let seq = gen_sequence(&small(40, 15, 9)).unwrap();
    let manifest = write_sequence(&seq, dir.path()).unwrap();
    let back = load_sequence(&manifest).unwrap();
    assert_eq!(back.len(), seq.len());
    for (p, q) in back.systems.iter().zip(&seq.systems) {
        assert_eq!(p.matrix, q.matrix);
        assert_eq!(p.rhs, q.rhs);
    }
}

#[test]
fn loading_rejects_changed_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_sequence(&small(20, 5, 1)).unwrap();
    let b = gen_sequence(&small(20, 5, 2)).unwrap();
    let mut mixed = a.clone();
    mixed.systems[2] = b.systems[2].clone();
    mixed.systems[2].index = 2;
    let manifest = write_sequence(&mixed, dir.path()).unwrap();
    assert!(matches!(
        load_sequence(&manifest),
        Err(Error::SequencePatternMismatch(2))
    ));
}

#[test]
fn analyze_once_sequence_reaches_optimization_accuracy() {
    let seq = gen_sequence(&small(700, 300, 4)).unwrap();
    let first = &seq.systems[0].matrix;
    let s = Arc::new(symbolic_analyze(first, AnalyzeOptions::default()).unwrap());
    let mut f = factorize(&s, first, FactorOptions::default()).unwrap();
    let mut ws = SolveWorkspace::default();
    for sys in &seq.systems {
        f.refactorize(&sys.matrix).unwrap();
        let x0 = solve_system(&f, &sys.rhs, &mut ws).unwrap();
        let out = fgmres_refine(
            &sys.matrix,
            &sys.rhs,
            &x0,
            LuPreconditioner {
                factors: &f,
                workspace: &mut ws,
            },
            &RefineConfig::default(),
        )
        .unwrap();
        let res = common::rel_residual(&sys.matrix, &out.x, &sys.rhs);
        assert!(res <= 1e-8, "system {} residual {res:e}", sys.index);
    }
}

#[test]
fn conditioning_grows_along_the_schedule() {
    for seed in 1..=5 {
        let seq = gen_sequence(&small(40, 15, seed)).unwrap();
        let conds: Vec<f64> = seq
            .systems
            .iter()
            .map(|s| common::condition_1(&s.matrix.to_dense()))
            .collect();
        let rising = conds.windows(2).filter(|w| w[1] >= w[0]).count();
        assert!(
            rising * 5 >= (conds.len() - 1) * 4,
            "seed {seed}: {conds:?}"
        );
    }
}
