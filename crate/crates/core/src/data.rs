//! Tabular datasets: CSV ingestion, min-max scaling and sanity checks.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Per-column range recorded by min-max scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub min: f64,
    pub max: f64,
}

impl ColumnScale {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        let range = self.max - self.min;
        if range > 0.0 {
            (x - self.min) / range
        } else {
            0.0
        }
    }

    /// Inverse of [`apply`](Self::apply). Constant columns map back to `min`.
    #[inline]
    pub fn invert(&self, y: f64) -> f64 {
        y * (self.max - self.min) + self.min
    }
}

/// Dense row-major feature matrix with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
    label_name: String,
    scaling: Option<Vec<ColumnScale>>,
}

impl Dataset {
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_features = feature_names.len();
        if rows.is_empty() {
            return Err(invalid("dataset needs at least one sample"));
        }
        if n_features == 0 {
            return Err(invalid("dataset needs at least one feature"));
        }
        if rows.len() != labels.len() {
            return Err(invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let mut features = Vec::with_capacity(rows.len() * n_features);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(invalid(format!(
                    "row {i} has {} values, expected {n_features}",
                    row.len()
                )));
            }
            features.extend_from_slice(row);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(invalid(format!(
                "label {bad} outside [0, {})",
                class_names.len()
            )));
        }
        Ok(Self {
            features,
            n_features,
            labels,
            feature_names,
            class_names,
            label_name: "label".to_string(),
            scaling: None,
        })
    }

    pub fn with_label_name(mut self, name: impl Into<String>) -> Self {
        self.label_name = name.into();
        self
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn is_normalized(&self) -> bool {
        self.scaling.is_some()
    }

    pub fn scaling(&self) -> Option<&[ColumnScale]> {
        self.scaling.as_deref()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Number of classes that actually occur.
    pub fn populated_classes(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    /// Rows `indices` in the given order, keeping schema and scaling.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            n_features: self.n_features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            label_name: self.label_name.clone(),
            scaling: self.scaling.clone(),
        }
    }

    /// Column minima and maxima.
    pub fn column_ranges(&self) -> Vec<ColumnScale> {
        let mut scales = vec![
            ColumnScale {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            };
            self.n_features
        ];
        for row in self.rows() {
            for (s, &x) in scales.iter_mut().zip(row) {
                s.min = s.min.min(x);
                s.max = s.max.max(x);
            }
        }
        scales
    }

    /// Maps every column to `[0, 1]` using its own range. Constant columns
    /// become 0. Fails on an already normalized dataset.
    pub fn normalize_minmax(&self) -> Result<Dataset> {
        let scales = self.column_ranges();
        self.apply_scaling(&scales)
    }

    /// Scales with externally fitted ranges (e.g. from a training portion).
    /// Values outside a recorded range are clamped into `[0, 1]`.
    pub fn apply_scaling(&self, scales: &[ColumnScale]) -> Result<Dataset> {
        if self.is_normalized() {
            return Err(Error::Precondition("dataset is already normalized".into()));
        }
        if scales.len() != self.n_features {
            return Err(invalid(format!(
                "{} column scales for {} features",
                scales.len(),
                self.n_features
            )));
        }
        let mut out = self.clone();
        for row in out.features.chunks_exact_mut(self.n_features) {
            for (x, s) in row.iter_mut().zip(scales) {
                *x = s.apply(*x).clamp(0.0, 1.0);
            }
        }
        out.scaling = Some(scales.to_vec());
        Ok(out)
    }

    /// Undoes min-max scaling using the recorded ranges.
    pub fn denormalize(&self) -> Result<Dataset> {
        let scales = self
            .scaling
            .as_ref()
            .ok_or_else(|| Error::Precondition("dataset is not normalized".into()))?;
        let mut out = self.clone();
        for row in out.features.chunks_exact_mut(self.n_features) {
            for (x, s) in row.iter_mut().zip(scales) {
                *x = s.invert(*x);
            }
        }
        out.scaling = None;
        Ok(out)
    }

    /// Writes a header row followed by the features and the class name.
    /// Floats use the shortest representation that parses back exactly.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io_err = |e: std::io::Error| Error::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_to_io(e, path))?;
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.label_name);
        w.write_record(&header).map_err(|e| csv_to_io(e, path))?;
        for (row, &label) in self.rows().zip(&self.labels) {
            let mut record: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            record.push(self.class_names[label].clone());
            w.write_record(&record).map_err(|e| csv_to_io(e, path))?;
        }
        w.flush().map_err(io_err)
    }
}

fn csv_to_io(e: csv::Error, path: &Path) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.trim().parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) if s.trim().is_empty() => LabelColumn::Last,
            Err(_) => LabelColumn::Name(s.trim().to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Name(n) => f.write_str(n),
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Last => f.write_str(""),
        }
    }
}

/// Reads a comma-separated file. Class names are mapped to ids in order of
/// first appearance; every other column must parse as a real number.
/// Reported rows are 1-based file lines, columns are 0-based.
pub fn load_csv(path: &Path, label: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(file);
    let pathbuf = PathBuf::from(path);
    let csv_err = |e: csv::Error| {
        let row = e.position().map(|p| p.line()).unwrap_or(0);
        let message = match e.kind() {
            csv::ErrorKind::UnequalLengths {
                expected_len, len, ..
            } => format!("expected {expected_len} fields, found {len}"),
            _ => e.to_string(),
        };
        Error::Csv {
            path: pathbuf.clone(),
            row,
            message,
        }
    };

    let header: Option<Vec<String>> = if has_header {
        Some(
            reader
                .headers()
                .map_err(&csv_err)?
                .iter()
                .map(str::to_string)
                .collect(),
        )
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut label_idx: Option<usize> = None;

    for record in reader.records() {
        let record = record.map_err(&csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let n = *width.get_or_insert(record.len());
        let li = match label_idx {
            Some(i) => i,
            None => {
                let i = resolve_label(label, header.as_deref(), n).ok_or_else(|| Error::Csv {
                    path: pathbuf.clone(),
                    row: line,
                    message: format!("unknown label column {label:?}"),
                })?;
                label_idx = Some(i);
                i
            }
        };
        let mut row = Vec::with_capacity(n - 1);
        for (col, cell) in record.iter().enumerate() {
            if col == li {
                continue;
            }
            let value = cell.parse::<f64>().map_err(|_| Error::Parse {
                path: pathbuf.clone(),
                row: line,
                column: col,
                value: cell.to_string(),
            })?;
            row.push(value);
        }
        let class = record[li].to_string();
        let next_id = class_ids.len();
        let id = *class_ids.entry(class.clone()).or_insert_with(|| {
            class_names.push(class);
            next_id
        });
        rows.push(row);
        labels.push(id);
    }

    let n = width.unwrap_or(0);
    if rows.is_empty() {
        return Err(Error::Csv {
            path: pathbuf,
            row: 0,
            message: "no data rows".into(),
        });
    }
    if n < 2 {
        return Err(Error::Csv {
            path: pathbuf,
            row: 1,
            message: "need at least one feature column besides the label".into(),
        });
    }
    let li = label_idx.expect("label column resolved with the first row");
    let feature_names: Vec<String> = match &header {
        Some(h) => h
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != li)
            .map(|(_, s)| s.clone())
            .collect(),
        None => (0..n)
            .filter(|&i| i != li)
            .map(|i| format!("f{i}"))
            .collect(),
    };
    let label_name = header
        .as_ref()
        .map(|h| h[li].clone())
        .unwrap_or_else(|| "label".to_string());
    Ok(Dataset::new(rows, labels, feature_names, class_names)?.with_label_name(label_name))
}

fn resolve_label(label: &LabelColumn, header: Option<&[String]>, width: usize) -> Option<usize> {
    match label {
        LabelColumn::Index(i) => (*i < width).then_some(*i),
        LabelColumn::Last => width.checked_sub(1),
        LabelColumn::Name(name) => header?.iter().position(|h| h == name),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

/// One problem reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Finding {
    /// Largest over smallest class count exceeds [`IMBALANCE_RATIO`].
    Imbalance {
        ratio: f64,
    },
    NonFinite {
        row: usize,
        column: usize,
    },
    DuplicateRow {
        row: usize,
        first: usize,
    },
}

pub const IMBALANCE_RATIO: f64 = 1.5;

impl Finding {
    pub fn severity(&self) -> Severity {
        match self {
            Finding::NonFinite { .. } => Severity::Error,
            Finding::Imbalance { .. } | Finding::DuplicateRow { .. } => Severity::Warning,
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Imbalance { ratio } => {
                write!(
                    f,
                    "class imbalance: largest/smallest class ratio {ratio:.3}"
                )
            }
            Finding::NonFinite { row, column } => {
                write!(f, "non-finite value at row {row}, column {column}")
            }
            Finding::DuplicateRow { row, first } => {
                write!(f, "row {row} duplicates row {first}")
            }
        }
    }
}

/// Data-quality checks. Rows and columns are 0-based sample/feature indices.
pub fn validate(dataset: &Dataset) -> Vec<Finding> {
    let mut findings = Vec::new();

    let counts = dataset.class_counts();
    if let (Some(&max), Some(&min)) = (counts.iter().max(), counts.iter().min()) {
        let ratio = if min == 0 {
            f64::INFINITY
        } else {
            max as f64 / min as f64
        };
        if ratio > IMBALANCE_RATIO {
            findings.push(Finding::Imbalance { ratio });
        }
    }

    for (r, row) in dataset.rows().enumerate() {
        for (c, x) in row.iter().enumerate() {
            if !x.is_finite() {
                findings.push(Finding::NonFinite { row: r, column: c });
            }
        }
    }

    let mut seen: HashMap<(Vec<u64>, usize), usize> = HashMap::new();
    for (r, (row, &label)) in dataset.rows().zip(dataset.labels()).enumerate() {
        let key = (row.iter().map(|x| x.to_bits()).collect(), label);
        match seen.get(&key) {
            Some(&first) => findings.push(Finding::DuplicateRow { row: r, first }),
            None => {
                seen.insert(key, r);
            }
        }
    }
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn minmax_formula_and_constant_column() {
        let ds = Dataset::new(
            vec![vec![0.0, 3.0], vec![5.0, 3.0], vec![10.0, 3.0]],
            vec![0, 1, 0],
            names(2),
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let n = ds.normalize_minmax().unwrap();
        let col0: Vec<f64> = n.rows().map(|r| r[0]).collect();
        let col1: Vec<f64> = n.rows().map(|r| r[1]).collect();
        assert_eq!(col0, vec![0.0, 0.5, 1.0]);
        assert_eq!(col1, vec![0.0, 0.0, 0.0]);
        assert!(n.is_normalized());
        assert!(matches!(n.normalize_minmax(), Err(Error::Precondition(_))));
        assert_eq!(n.denormalize().unwrap(), ds);
    }

    #[test]
    fn load_with_header_and_named_label() {
        let f = write_tmp("a,species,b\n1.0,x,2\n3,y,4.5\n5,x,6\n");
        let ds = load_csv(f.path(), &LabelColumn::Name("species".into()), true).unwrap();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.class_names(), &["x".to_string(), "y".to_string()]);
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.row(1), &[3.0, 4.5]);
        assert_eq!(ds.label_name(), "species");
    }

    #[test]
    fn load_without_header_by_index() {
        let f = write_tmp("b,1,2\na,3,4\n");
        let ds = load_csv(f.path(), &LabelColumn::Index(0), false).unwrap();
        assert_eq!(ds.labels(), &[0, 1]);
        assert_eq!(ds.class_names(), &["b".to_string(), "a".to_string()]);
        assert_eq!(ds.feature_names(), &["f1".to_string(), "f2".to_string()]);
    }

    #[test]
    fn non_numeric_cell_names_location() {
        let f = write_tmp("a,b,y\n1,2,p\n3,oops,q\n");
        let err = load_csv(f.path(), &LabelColumn::Name("y".into()), true).unwrap_err();
        match err {
            Error::Parse {
                row, column, value, ..
            } => {
                assert_eq!(row, 3);
                assert_eq!(column, 1);
                assert_eq!(value, "oops");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_cell_is_rejected() {
        let f = write_tmp("a,b,y\n1,,p\n");
        assert!(matches!(
            load_csv(f.path(), &LabelColumn::Last, true),
            Err(Error::Parse {
                row: 2,
                column: 1,
                ..
            })
        ));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let f = write_tmp("a,b,y\n1,2,p\n3,q\n");
        match load_csv(f.path(), &LabelColumn::Last, true).unwrap_err() {
            Error::Csv { row, message, .. } => {
                assert_eq!(row, 3);
                assert!(message.contains("expected 3"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_label_and_missing_file() {
        let f = write_tmp("a,b\n1,2\n");
        assert!(matches!(
            load_csv(f.path(), &LabelColumn::Name("nope".into()), true),
            Err(Error::Csv { .. })
        ));
        assert!(matches!(
            load_csv(f.path(), &LabelColumn::Index(7), true),
            Err(Error::Csv { .. })
        ));
        let err = load_csv(Path::new("/no/such/file.csv"), &LabelColumn::Last, true).unwrap_err();
        assert!(err.to_string().contains("/no/such/file.csv"));
    }

    #[test]
    fn label_column_parsing() {
        assert_eq!("3".parse::<LabelColumn>().unwrap(), LabelColumn::Index(3));
        assert_eq!(
            "species".parse::<LabelColumn>().unwrap(),
            LabelColumn::Name("species".into())
        );
    }

    #[test]
    fn validate_flags_nan_imbalance_and_duplicates() {
        let mut rows = vec![vec![0.0, 1.0]; 1];
        rows.extend((1..10).map(|i| vec![i as f64, 0.0]));
        let mut labels = vec![0; 9];
        labels.push(1);
        rows[4][1] = f64::NAN;
        rows[7] = rows[6].clone();
        let ds = Dataset::new(rows, labels, names(2), vec!["a".into(), "b".into()]).unwrap();
        let findings = validate(&ds);
        assert!(findings.contains(&Finding::NonFinite { row: 4, column: 1 }));
        assert!(findings.contains(&Finding::DuplicateRow { row: 7, first: 6 }));
        assert!(findings
            .iter()
            .any(|f| matches!(f, Finding::Imbalance { ratio } if *ratio == 9.0)));
        let errors: Vec<_> = findings
            .iter()
            .filter(|f| f.severity() == Severity::Error)
            .collect();
        assert_eq!(errors.len(), 1);
    }

    #[test]
    fn balanced_distinct_data_has_no_findings() {
        let rows = (0..6).map(|i| vec![i as f64]).collect();
        let ds = Dataset::new(rows, vec![0, 1, 2, 0, 1, 2], names(1), names(3)).unwrap();
        assert!(validate(&ds).is_empty());
    }

    #[test]
    fn subset_keeps_schema() {
        let rows = (0..4).map(|i| vec![i as f64, -(i as f64)]).collect();
        let ds = Dataset::new(rows, vec![0, 1, 0, 1], names(2), names(2)).unwrap();
        let s = ds.subset(&[3, 1]);
        assert_eq!(s.n_samples(), 2);
        assert_eq!(s.row(0), &[3.0, -3.0]);
        assert_eq!(s.labels(), &[1, 1]);
        assert_eq!(s.feature_names(), ds.feature_names());
    }
}
