use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curriculum::{Curriculum, Evaluation, Metric};
use crate::error::{Error, Result};
use crate::optimizers::{Algorithm, OptimizerReport};

pub const CSV_COLUMNS: [&str; 7] = [
    "curriculum_encoding",
    "metric",
    "mean",
    "ci_lo",
    "ci_hi",
    "trials",
    "order_evaluated",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Canonical encoding; empty for the no-curriculum baseline.
    pub curriculum: String,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: usize,
}

impl ResultRow {
    pub fn new(curriculum: &Curriculum, evaluation: &Evaluation, names: &[String]) -> Self {
        ResultRow {
            curriculum: curriculum.encode(names),
            mean: evaluation.mean,
            ci_lo: evaluation.ci_lo,
            ci_hi: evaluation.ci_hi,
            trials: evaluation.trials(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub best: ResultRow,
    pub evaluations_used: usize,
    pub iterations: usize,
    /// Evaluation log, relative to the report.
    pub log_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub seed: u64,
    pub objective: String,
    pub metric: Metric,
    pub threshold: Option<f64>,
    pub regret_floor: Option<f64>,
    pub tasks: Vec<String>,
    pub final_task: Option<String>,
    pub max_len: usize,
    pub space_size: u64,
    pub trials: usize,
    pub comparison_mode: bool,
    pub baseline: ResultRow,
    pub algorithms: Vec<AlgorithmSummary>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("report: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::file(path, e.to_string()))
    }

    /// Plain-text table, one row per algorithm plus the baseline.
    pub fn render_table(&self) -> String {
        let mut rows = vec![[
            "algorithm".to_string(),
            "evaluated".to_string(),
            self.metric.short_name().to_string(),
            "95% CI".to_string(),
            "best curriculum".to_string(),
        ]];
        let fmt_row = |name: &str, evaluated: String, r: &ResultRow| {
            [
                name.to_string(),
                evaluated,
                format!("{:.4}", r.mean),
                format!("[{:.4}, {:.4}]", r.ci_lo, r.ci_hi),
                if r.curriculum.is_empty() { "<>".to_string() } else { r.curriculum.clone() },
            ]
        };
        rows.push(fmt_row("C0", "1".into(), &self.baseline));
        for a in &self.algorithms {
            rows.push(fmt_row(a.algorithm.id(), a.evaluations_used.to_string(), &a.best));
        }
        let widths: Vec<usize> = (0..5).map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0)).collect();
        let mut out = format!(
            "tasks = {}; L = {}; curricula = {}; trials = {}; seed = {}\n",
            self.tasks.len(),
            self.max_len,
            self.space_size,
            self.trials,
            self.seed
        );
        for row in &rows {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
        }
        out
    }
}

/// Evaluation log of one optimizer run, one row per distinct curriculum.
pub fn log_csv(report: &OptimizerReport, names: &[String], metric: Metric) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::config(format!("csv: {e}"));
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for (i, entry) in report.log.iter().enumerate() {
        let e = &entry.evaluation;
        w.write_record([
            entry.curriculum.encode(names),
            metric.short_name().to_string(),
            e.mean.to_string(),
            e.ci_lo.to_string(),
            e.ci_hi.to_string(),
            e.trials().to_string(),
            i.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
