//! Command-line front end.
//!
//! Exit codes: 0 when every system is solved, 2 when some system fails,
//! 1 for usage and input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kktlu::kkt::{gen_sequence, load_systems, write_sequence, KktSystem, SequenceConfig};
use kktlu::refine::{RefineConfig, RefineMethod, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
use kktlu::sparse::mm;
use kktlu::{AnalyzeOptions, Execution, FactorOptions};

use crate::config::GenConfig;
use crate::driver::{run_sequence, DriverOptions, DEFAULT_ACCEPT_TOLERANCE};
use crate::report::SolveReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "kktlu",
    version,
    about = "Sparse LU refactorization for KKT system sequences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic KKT sequence as Matrix Market files plus a manifest
    Gen(GenArgs),
    /// Solve a sequence: analyze once, refactorize the rest
    SolveSeq(SolveSeqArgs),
    /// Render a saved JSON report as JSON or CSV
    Report(ReportArgs),
    /// Solve one Matrix Market system
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// TOML file with sequence parameters; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Seed for the H and J patterns and values
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seed for the per-step y trajectory
    #[arg(long)]
    pub y_seed: Option<u64>,
    /// Fixed sequence length instead of the schedule-derived one
    #[arg(long)]
    pub systems: Option<usize>,
    #[arg(long)]
    pub mu0: Option<f64>,
    #[arg(long)]
    pub mu_min: Option<f64>,
    #[arg(long)]
    pub reduction: Option<f64>,
    #[arg(long)]
    pub delta_p: Option<f64>,
    #[arg(long)]
    pub delta_d: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scaling {
    Mc64,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ordering {
    Amd,
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Refine {
    Fgmres,
    Classic,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sequential,
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "mc64")]
    pub scaling: Scaling,
    #[arg(long, value_enum, default_value = "amd")]
    pub ordering: Ordering,
    #[arg(long, value_enum, default_value = "none")]
    pub refine: Refine,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub refine_tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub refine_maxit: usize,
    #[arg(long, value_enum, default_value = "sequential")]
    pub mode: Mode,
    /// Worker threads in parallel mode; defaults to the available cores
    #[arg(long)]
    pub workers: Option<usize>,
    /// Largest final relative residual accepted before escalating
    #[arg(long, default_value_t = DEFAULT_ACCEPT_TOLERANCE)]
    pub accept_tol: f64,
}

impl SolverArgs {
    pub fn driver_options(&self) -> Result<DriverOptions> {
        let execution = match self.mode {
            Mode::Sequential => Execution::sequential(),
            Mode::Parallel => {
                let w = self
                    .workers
                    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
                if w == 0 {
                    bail!("--workers must be at least 1");
                }
                Execution::scheduled(w)
            }
        };
        let refine = match self.refine {
            Refine::None => None,
            Refine::Fgmres | Refine::Classic => {
                let cfg = RefineConfig {
                    max_iterations: self.refine_maxit,
                    tolerance: self.refine_tol,
                    enabled: true,
                    method: if self.refine == Refine::Fgmres {
                        RefineMethod::Fgmres
                    } else {
                        RefineMethod::Classic
                    },
                };
                cfg.validate()?;
                Some(cfg)
            }
        };
        if !(self.accept_tol > 0.0) {
            bail!("--accept-tol must be positive");
        }
        Ok(DriverOptions {
            analyze: AnalyzeOptions {
                use_scaling: self.scaling == Scaling::Mc64,
                use_amd: self.ordering == Ordering::Amd,
            },
            factor: FactorOptions {
                execution,
                ..FactorOptions::default()
            },
            refine,
            accept_tolerance: self.accept_tol,
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveSeqArgs {
    /// Sequence manifest
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    pub input: Option<PathBuf>,
    /// TOML generator config; the sequence is generated in memory
    #[arg(long)]
    pub gen: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Report destination; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON report written by solve-seq or solve
    pub report: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Matrix Market matrix
    pub matrix: PathBuf,
    /// Right-hand side as an n x 1 Matrix Market vector; defaults to A * ones
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// Where to write the solution vector
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a).map(|_| EXIT_OK),
        Command::SolveSeq(a) => cmd_solve_seq(a).map(exit_for),
        Command::Report(a) => cmd_report(a).map(|_| EXIT_OK),
        Command::Solve(a) => cmd_solve(a).map(exit_for),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn exit_for(report: SolveReport) -> i32 {
    if report.all_solved() {
        EXIT_OK
    } else {
        EXIT_PARTIAL
    }
}

fn sequence_config(config: Option<&Path>) -> Result<SequenceConfig> {
    let base = SequenceConfig::default();
    Ok(match config {
        Some(p) => GenConfig::load(p)?.apply(base),
        None => base,
    })
}

/// Generates and writes a sequence. Returns the manifest path.
pub fn cmd_gen(args: &GenArgs) -> Result<PathBuf> {
    let flags = GenConfig {
        n: args.n,
        m: args.m,
        topology_seed: args.seed,
        mu0: args.mu0,
        mu_min: args.mu_min,
        reduction: args.reduction,
        delta_p: args.delta_p,
        delta_d: args.delta_d,
        y_seed: args.y_seed,
        systems: args.systems,
        active_fraction: None,
    };
    let cfg = flags.apply(sequence_config(args.config.as_deref())?);
    let seq = gen_sequence(&cfg)?;
    let manifest = write_sequence(&seq, &args.out)
        .with_context(|| format!("writing sequence to {}", args.out.display()))?;
    eprintln!("wrote {} systems to {}", seq.len(), manifest.display());
    Ok(manifest)
}

pub fn cmd_solve_seq(args: &SolveSeqArgs) -> Result<SolveReport> {
    let opts = args.solver.driver_options()?;
    let systems: Vec<KktSystem> = match (&args.input, &args.gen) {
        (Some(manifest), _) => {
            load_systems(manifest).with_context(|| format!("loading {}", manifest.display()))?
        }
        (None, Some(cfg)) => gen_sequence(&sequence_config(Some(cfg))?)?.systems,
        (None, None) => bail!("one of --input or --gen is required"),
    };
    let run = run_sequence(&systems, &opts);
    emit(&run.report, args.format, args.out.as_deref())?;
    Ok(run.report)
}

pub fn cmd_report(args: &ReportArgs) -> Result<SolveReport> {
    let text = std::fs::read_to_string(&args.report)
        .with_context(|| format!("reading {}", args.report.display()))?;
    let report = SolveReport::from_json(&text)
        .with_context(|| format!("malformed report {}", args.report.display()))?;
    emit(&report, args.format, args.out.as_deref())?;
    Ok(report)
}

pub fn cmd_solve(args: &SolveArgs) -> Result<SolveReport> {
    let opts = args.solver.driver_options()?;
    let matrix = mm::mm_read(&args.matrix)
        .with_context(|| format!("reading {}", args.matrix.display()))?
        .to_csr()?;
    if !matrix.is_square() {
        bail!(
            "matrix is {} x {}, expected square",
            matrix.nrows,
            matrix.ncols
        );
    }
    let rhs = match &args.rhs {
        Some(p) => {
            let v = mm::read_vector(p).with_context(|| format!("reading {}", p.display()))?;
            if v.len() != matrix.nrows {
                bail!("rhs has length {}, expected {}", v.len(), matrix.nrows);
            }
            v
        }
        None => matrix.spmv(&vec![1.0; matrix.ncols])?,
    };
    let system = KktSystem {
        index: 0,
        mu: f64::NAN,
        matrix,
        rhs,
        x_true: None,
        blocks: None,
    };
    let run = run_sequence(std::slice::from_ref(&system), &opts);
    if let (Some(path), Some(Some(x))) = (&args.solution, run.solutions.first()) {
        mm::write_vector(x, path)?;
    }
    emit(&run.report, args.format, args.out.as_deref())?;
    Ok(run.report)
}

fn emit(report: &SolveReport, format: Format, out: Option<&Path>) -> Result<()> {
    let text = match format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv()?,
    };
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
