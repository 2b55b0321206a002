//! Analyze-once, refactorize-rest over a sequence of systems.
//!
//! A system is accepted when its final relative residual is finite and at
//! most `accept_tolerance`. When factorization fails or the system is not
//! accepted the driver escalates: generated systems are first retried with
//! doubled regularization on the current analysis, then the system is
//! re-analyzed from its own values. A pattern change always forces a new
//! analysis.

use std::sync::Arc;
use std::time::{Duration, Instant};

use kktlu::kkt::{with_scaled_regularization, KktSystem};
use kktlu::refine::{classic_refine, Fgmres, LuPreconditioner, RefineConfig, RefineMethod};
use kktlu::sparse::norm2;
use kktlu::{
    symbolic_analyze, AnalyzeOptions, CsrMatrix, FactorOptions, NumericFactors, SolveWorkspace,
    SymbolicFactors,
};

use crate::report::{ms, SolveReport, Status, SystemRecord};

pub const DEFAULT_ACCEPT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverOptions {
    pub analyze: AnalyzeOptions,
    pub factor: FactorOptions,
    /// `None` skips refinement.
    pub refine: Option<RefineConfig>,
    pub accept_tolerance: f64,
}

impl Default for DriverOptions {
    fn default() -> Self {
        Self {
            analyze: AnalyzeOptions::default(),
            factor: FactorOptions::default(),
            refine: None,
            accept_tolerance: DEFAULT_ACCEPT_TOLERANCE,
        }
    }
}

#[derive(Debug, Default)]
struct Phases {
    analyze: Duration,
    scatter: Duration,
    factor: Duration,
    trisolve: Duration,
    refine: Duration,
}

struct Attempt {
    x: Vec<f64>,
    relres_direct: f64,
    relres_final: f64,
    refine_iters: usize,
}

/// Solves every system and returns the report together with the solutions
/// (`None` for failed systems).
pub struct SequenceRun {
    pub report: SolveReport,
    pub solutions: Vec<Option<Vec<f64>>>,
}

pub fn run_sequence(systems: &[KktSystem], opts: &DriverOptions) -> SequenceRun {
    let start = Instant::now();
    let mut state: Option<NumericFactors> = None;
    let mut ws = SolveWorkspace::default();
    let mut krylov = Fgmres::default();
    let mut analyses = 0;
    let mut retries = 0;
    let mut records = Vec::with_capacity(systems.len());
    let mut solutions = Vec::with_capacity(systems.len());

    for sys in systems {
        let wall = Instant::now();
        let mut ph = Phases::default();
        let mut status = Status::Ok;

        let fits = state
            .as_ref()
            .is_some_and(|f| f.symbolic().matches_pattern(&sys.matrix));
        if !fits {
            state = analyze(&sys.matrix, opts, &mut ph);
            analyses += 1;
        }

        let mut result = state.as_mut().and_then(|f| {
            attempt(
                f,
                &sys.matrix,
                &sys.rhs,
                opts,
                &mut ws,
                &mut krylov,
                &mut ph,
            )
        });

        if let (false, Some(f)) = (accepted(&result, opts), state.as_mut()) {
            if let Some(bumped) = with_scaled_regularization(sys, 2.0) {
                retries += 1;
                let r = attempt(
                    f,
                    &bumped.matrix,
                    &sys.rhs,
                    opts,
                    &mut ws,
                    &mut krylov,
                    &mut ph,
                );
                if accepted(&r, opts) {
                    status = Status::Regularized;
                    result = r;
                }
            }
        }

        if !accepted(&result, opts) && fits {
            state = analyze(&sys.matrix, opts, &mut ph);
            analyses += 1;
            let r = state.as_mut().and_then(|f| {
                attempt(
                    f,
                    &sys.matrix,
                    &sys.rhs,
                    opts,
                    &mut ws,
                    &mut krylov,
                    &mut ph,
                )
            });
            if accepted(&r, opts) {
                status = Status::Reanalyzed;
            }
            result = r.or(result);
        }

        if !accepted(&result, opts) {
            status = Status::Failed;
        } else if !fits && !records.is_empty() && status == Status::Ok {
            // pattern break: solved, but only through a new analysis
            status = Status::Reanalyzed;
        }

        let wall = wall.elapsed();
        let (relres_direct, relres_final, refine_iters) =
            result.as_ref().map_or((f64::NAN, f64::NAN, 0), |a| {
                (a.relres_direct, a.relres_final, a.refine_iters)
            });
        records.push(SystemRecord {
            k: sys.index,
            n: sys.matrix.nrows,
            nnz: sys.matrix.nnz(),
            analyze_ms: ms(ph.analyze),
            scatter_ms: ms(ph.scatter),
            factor_ms: ms(ph.factor),
            trisolve_ms: ms(ph.trisolve),
            refine_ms: ms(ph.refine),
            refine_iters,
            relres_direct,
            relres_final,
            status,
            wall_ms: ms(wall),
        });
        solutions.push(if status.solved() {
            result.map(|a| a.x)
        } else {
            None
        });
    }

    SequenceRun {
        report: SolveReport::new(records, start.elapsed(), analyses, retries),
        solutions,
    }
}

fn accepted(result: &Option<Attempt>, opts: &DriverOptions) -> bool {
    result
        .as_ref()
        .is_some_and(|a| a.relres_final.is_finite() && a.relres_final <= opts.accept_tolerance)
}

fn analyze(a: &CsrMatrix, opts: &DriverOptions, ph: &mut Phases) -> Option<NumericFactors> {
    let t = Instant::now();
    let sym = symbolic_analyze(a, opts.analyze).ok();
    ph.analyze += t.elapsed();
    sym.map(|s: SymbolicFactors| NumericFactors::new(Arc::new(s), opts.factor))
}

fn attempt(
    f: &mut NumericFactors,
    a: &CsrMatrix,
    b: &[f64],
    opts: &DriverOptions,
    ws: &mut SolveWorkspace,
    krylov: &mut Fgmres,
    ph: &mut Phases,
) -> Option<Attempt> {
    let t = Instant::now();
    let scattered = f.scatter(a);
    ph.scatter += t.elapsed();
    scattered.ok()?;

    let t = Instant::now();
    let factored = f.factor_scattered();
    ph.factor += t.elapsed();
    factored.ok()?;

    let t = Instant::now();
    let mut x = vec![0.0; b.len()];
    let solved = kktlu::solve_into(f, b, &mut x, ws);
    ph.trisolve += t.elapsed();
    solved.ok()?;

    let Some(cfg) = opts.refine.filter(|c| c.enabled) else {
        let rel = relative_residual(a, &x, b);
        return Some(Attempt {
            x,
            relres_direct: rel,
            relres_final: rel,
            refine_iters: 0,
        });
    };

    let t = Instant::now();
    let mut pre = LuPreconditioner {
        factors: f,
        workspace: ws,
    };
    let out = match cfg.method {
        RefineMethod::Fgmres => krylov.solve(&mut &*a, &mut pre, b, &x, &cfg),
        RefineMethod::Classic => classic_refine(a, b, &x, pre, &cfg),
    };
    ph.refine += t.elapsed();
    let out = out.ok()?;
    Some(Attempt {
        // the refiner's own starting residual, so that final <= direct holds exactly
        relres_direct: out.residual_history[0],
        relres_final: out.final_residual,
        refine_iters: out.iterations,
        x: out.x,
    })
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let Ok(mut r) = a.spmv(x) else {
        return f64::NAN;
    };
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let bn = norm2(b);
    if bn == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / bn
    }
}
