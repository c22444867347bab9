//! Report files written by `select` and `oracle`, and the merged comparison.
//!
//! Every report is one JSON object with `schema_version`, `kind`
//! (`select` or `oracle`), a `provenance` block and a kind-specific body.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bcddo::harness::{ExperimentReport, OracleResult, Stats};
use bcddo::{ConfusionMatrix, Metrics, RunConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub path: String,
    pub sha256: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    pub class_counts: Vec<usize>,
    /// Data-check warnings raised at load time.
    pub findings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub dataset: DatasetInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleBody {
    pub selected_features: Vec<String>,
    pub result: OracleResult,
    /// Test-split metrics of the optimal mask.
    pub test: Metrics,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Body {
    Select { experiment: ExperimentReport },
    Oracle { oracle: OracleBody },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: Body,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(body: Body, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            body,
            provenance,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            Body::Select { .. } => "select",
            Body::Oracle { .. } => "oracle",
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let fail = |msg: String| CliError::Data(format!("{}: {msg}", path.display()));
        let text = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| fail(format!("invalid JSON: {e}")))?;
        match value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
        {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(fail(format!(
                    "unsupported schema_version {v} (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(fail("missing schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| fail(format!("schema mismatch: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let fail = |e: String| CliError::Runtime(format!("cannot write {}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| fail(e.to_string()))?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| fail(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| fail(e.to_string()))
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub source: PathBuf,
    pub kind: String,
    pub dataset: String,
    pub sha256: String,
    pub runs: usize,
    pub accuracy: Stats,
    pub precision: Stats,
    pub recall: Stats,
    pub f1: Stats,
    pub fitness: Stats,
    pub selected_count: Stats,
    pub total_features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub schema_version: u32,
    pub kind: String,
    pub rows: Vec<Row>,
}

impl Row {
    pub fn from_report(source: &Path, report: &Report) -> Self {
        let info = &report.provenance.dataset;
        let dataset = Path::new(&info.path)
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| info.path.clone());
        let one = |x: f64| Stats::of(&[x]);
        let (runs, accuracy, precision, recall, f1, fitness, selected_count) = match &report.body {
            Body::Select { experiment } => {
                let s = &experiment.summary;
                (
                    s.runs,
                    s.accuracy,
                    s.precision,
                    s.recall,
                    s.f1,
                    s.fitness,
                    s.selected_count,
                )
            }
            Body::Oracle { oracle } => (
                1,
                one(oracle.test.accuracy),
                one(oracle.test.precision),
                one(oracle.test.recall),
                one(oracle.test.f1),
                one(oracle.result.best_fitness),
                one(oracle.result.best_mask.count() as f64),
            ),
        };
        Self {
            source: source.to_path_buf(),
            kind: report.kind().to_string(),
            dataset,
            sha256: info.sha256.clone(),
            runs,
            accuracy,
            precision,
            recall,
            f1,
            fitness,
            selected_count,
            total_features: info.n_features,
        }
    }
}

impl Comparison {
    pub fn new(rows: Vec<Row>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: "comparison".into(),
            rows,
        }
    }

    pub fn to_text(&self) -> String {
        let pm = |s: &Stats| format!("{:.4}±{:.4}", s.mean, s.std);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<28} {:<7} {:<22} {:>4} {:>15} {:>15} {:>15} {:>15} {:>15} {:>9}",
            "report",
            "kind",
            "dataset",
            "runs",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "fitness",
            "selected"
        );
        for r in &self.rows {
            let source = r
                .source
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{:<28} {:<7} {:<22} {:>4} {:>15} {:>15} {:>15} {:>15} {:>15} {:>9}",
                source,
                r.kind,
                r.dataset,
                r.runs,
                pm(&r.accuracy),
                pm(&r.precision),
                pm(&r.recall),
                pm(&r.f1),
                pm(&r.fitness),
                format!("{:.1}/{}", r.selected_count.mean, r.total_features),
            );
        }
        out
    }
}
