//! Per-system phase timings and their aggregate, with JSON and CSV output.

use std::io::Write;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Solved on the first attempt.
    Ok,
    /// Solved after re-assembling with stronger regularization.
    Regularized,
    /// Solved after a fresh symbolic analysis.
    Reanalyzed,
    Failed,
}

impl Status {
    pub fn solved(self) -> bool {
        self != Status::Failed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRecord {
    pub k: usize,
    pub n: usize,
    pub nnz: usize,
    pub analyze_ms: f64,
    pub scatter_ms: f64,
    pub factor_ms: f64,
    pub trisolve_ms: f64,
    pub refine_ms: f64,
    pub refine_iters: usize,
    pub relres_direct: f64,
    pub relres_final: f64,
    pub status: Status,
    /// Wall time for the whole system, phases included.
    pub wall_ms: f64,
}

impl SystemRecord {
    pub fn phase_sum_ms(&self) -> f64 {
        self.analyze_ms + self.scatter_ms + self.factor_ms + self.trisolve_ms + self.refine_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub total_ms: f64,
    pub mean_analyze_ms: f64,
    pub mean_scatter_ms: f64,
    pub mean_factor_ms: f64,
    pub mean_trisolve_ms: f64,
    pub mean_refine_ms: f64,
    pub systems: usize,
    pub systems_solved: usize,
    /// Symbolic analyses performed, the initial one included.
    pub analyses: usize,
    /// Analyses beyond the initial one.
    pub reanalysis_count: usize,
    pub regularization_retries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub records: Vec<SystemRecord>,
    pub aggregate: Aggregate,
}

/// Milliseconds, truncated to whole microseconds.
pub fn ms(d: Duration) -> f64 {
    d.as_micros() as f64 / 1000.0
}

impl SolveReport {
    pub fn new(
        records: Vec<SystemRecord>,
        total: Duration,
        analyses: usize,
        regularization_retries: usize,
    ) -> Self {
        let count = records.len().max(1) as f64;
        let mean = |f: fn(&SystemRecord) -> f64| records.iter().map(f).sum::<f64>() / count;
        let aggregate = Aggregate {
            total_ms: ms(total),
            mean_analyze_ms: mean(|r| r.analyze_ms),
            mean_scatter_ms: mean(|r| r.scatter_ms),
            mean_factor_ms: mean(|r| r.factor_ms),
            mean_trisolve_ms: mean(|r| r.trisolve_ms),
            mean_refine_ms: mean(|r| r.refine_ms),
            systems: records.len(),
            systems_solved: records.iter().filter(|r| r.status.solved()).count(),
            analyses,
            reanalysis_count: analyses.saturating_sub(1),
            regularization_retries,
        };
        Self { records, aggregate }
    }

    pub fn all_solved(&self) -> bool {
        self.aggregate.systems_solved == self.aggregate.systems
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One header line and one row per system. The aggregate is JSON-only.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> csv::Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}
