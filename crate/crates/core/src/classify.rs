//! Brute-force k-nearest-neighbor classification, stratified splitting and
//! confusion-matrix metrics.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::rng::seeded_rng;

#[inline]
fn squared_distance(a: &[f64], b: &[f64], features: &[usize]) -> f64 {
    features
        .iter()
        .map(|&f| {
            let d = a[f] - b[f];
            d * d
        })
        .sum()
}

#[inline]
fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// KNN over a borrowed training set restricted to a subset of feature columns.
#[derive(Debug, Clone)]
pub struct KnnClassifier<'a> {
    train: &'a Dataset,
    features: Vec<usize>,
    k: usize,
}

impl<'a> KnnClassifier<'a> {
    pub fn new(train: &'a Dataset, features: Vec<usize>, k: usize) -> Result<Self> {
        if train.n_samples() == 0 {
            return Err(invalid("training set is empty"));
        }
        if k == 0 || k > train.n_samples() {
            return Err(invalid(format!(
                "k must lie in [1, {}], got {k}",
                train.n_samples()
            )));
        }
        if let Some(&f) = features.iter().find(|&&f| f >= train.n_features()) {
            return Err(invalid(format!(
                "feature index {f} out of range for {} features",
                train.n_features()
            )));
        }
        Ok(Self { train, features, k })
    }

    /// Majority label of the `k` nearest rows. Equal distances rank the lower
    /// training index first; tied votes go to the tied class whose member
    /// ranks nearest.
    pub fn predict(&self, query: &[f64]) -> usize {
        let mut neighbors: Vec<(f64, usize)> = self
            .train
            .rows()
            .enumerate()
            .map(|(i, row)| (squared_distance(row, query, &self.features), i))
            .collect();
        let k = self.k;
        if k < neighbors.len() {
            neighbors.select_nth_unstable_by(k - 1, by_distance_then_index);
            neighbors.truncate(k);
        }
        neighbors.sort_unstable_by(by_distance_then_index);

        let labels = self.train.labels();
        let mut votes = vec![0usize; self.train.num_classes()];
        for &(_, i) in &neighbors {
            votes[labels[i]] += 1;
        }
        let top = votes.iter().copied().max().unwrap_or(0);
        neighbors
            .iter()
            .map(|&(_, i)| labels[i])
            .find(|&c| votes[c] == top)
            .expect("k >= 1 neighbors")
    }

    pub fn predict_all(&self, queries: &Dataset) -> Vec<usize> {
        queries.rows().map(|q| self.predict(q)).collect()
    }
}

/// One-shot prediction for a single query.
pub fn knn_predict(train: &Dataset, features: &[usize], query: &[f64], k: usize) -> Result<usize> {
    Ok(KnnClassifier::new(train, features.to_vec(), k)?.predict(query))
}

fn check_lengths(predictions: &[usize], truth: &[usize]) -> Result<()> {
    if predictions.len() != truth.len() {
        return Err(invalid(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(invalid("no predictions to score"));
    }
    Ok(())
}

/// Fraction of mismatched predictions.
pub fn error_rate(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(predictions, truth)?;
    let wrong = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p != t)
        .count();
    Ok(wrong as f64 / truth.len() as f64)
}

pub fn accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(predictions, truth)?;
    let right = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    Ok(right as f64 / truth.len() as f64)
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let n = counts.len();
        if n == 0 || counts.iter().any(|r| r.len() != n) {
            return Err(invalid("confusion matrix must be square and non-empty"));
        }
        Ok(Self { counts })
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn column_sum(&self, class: usize) -> u64 {
        self.counts.iter().map(|r| r[class]).sum()
    }
}

pub fn confusion(
    predictions: &[usize],
    truth: &[usize],
    num_classes: usize,
) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(invalid(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if num_classes == 0 {
        return Err(invalid("num_classes must be at least 1"));
    }
    let mut counts = vec![vec![0u64; num_classes]; num_classes];
    for (i, (&p, &t)) in predictions.iter().zip(truth).enumerate() {
        if p >= num_classes || t >= num_classes {
            return Err(invalid(format!(
                "sample {i}: label out of range [0, {num_classes}) (true {t}, predicted {p})"
            )));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Classification quality derived from a confusion matrix.
///
/// With two classes, class 1 is the positive class and precision, recall and
/// F1 follow the usual TP/FP/FN definitions. With more classes they are
/// macro averages of the per-class one-vs-rest values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// One-vs-rest accuracy `(TP_c + TN_c) / N` for each class.
    pub per_class_accuracy: Vec<f64>,
    pub per_class_precision: Vec<f64>,
    pub per_class_recall: Vec<f64>,
    pub support: u64,
}

/// `num / den`, or 0 when nothing was counted.
#[inline]
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
#[inline]
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    let den = precision + recall;
    if den == 0.0 {
        0.0
    } else {
        2.0 * (precision * recall) / den
    }
}

pub fn metrics_from_confusion(cm: &ConfusionMatrix) -> Result<Metrics> {
    let n = cm.total();
    if n == 0 {
        return Err(invalid("confusion matrix holds no samples"));
    }
    let c = cm.num_classes();
    let mut per_class_accuracy = Vec::with_capacity(c);
    let mut per_class_precision = Vec::with_capacity(c);
    let mut per_class_recall = Vec::with_capacity(c);
    let mut per_class_f1 = Vec::with_capacity(c);
    for k in 0..c {
        let tp = cm.get(k, k);
        let fp = cm.column_sum(k) - tp;
        let fn_ = cm.row_sum(k) - tp;
        let tn = n - tp - fp - fn_;
        let p = ratio(tp, fp + tp);
        let r = ratio(tp, fn_ + tp);
        per_class_accuracy.push(ratio(tp + tn, tp + tn + fp + fn_));
        per_class_precision.push(p);
        per_class_recall.push(r);
        per_class_f1.push(f1_score(p, r));
    }
    let trace: u64 = (0..c).map(|k| cm.get(k, k)).sum();

    let (accuracy, precision, recall, f1) = if c == 2 {
        let (tp, tn, fp, fn_) = (cm.get(1, 1), cm.get(0, 0), cm.get(0, 1), cm.get(1, 0));
        let precision = ratio(tp, fp + tp);
        let recall = ratio(tp, fn_ + tp);
        (
            ratio(tp + tn, tp + tn + fp + fn_),
            precision,
            recall,
            f1_score(precision, recall),
        )
    } else {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        (
            ratio(trace, n),
            mean(&per_class_precision),
            mean(&per_class_recall),
            mean(&per_class_f1),
        )
    };

    Ok(Metrics {
        accuracy,
        precision,
        recall,
        f1,
        per_class_accuracy,
        per_class_precision,
        per_class_recall,
        support: n,
    })
}

/// Row indices of a per-class proportional split: for each class,
/// `round(n_c * train_fraction)` shuffled members (at least one on each side)
/// go to the training part. Both index lists come back sorted.
pub fn stratified_indices<R: Rng + ?Sized>(
    labels: &[usize],
    num_classes: usize,
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, members) in by_class.iter_mut().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(invalid(format!(
                "class {class} has {} sample(s); stratified splitting needs at least 2",
                members.len()
            )));
        }
        members.shuffle(rng);
        let n = members.len();
        let n_train = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split_with<R: Rng + ?Sized>(
    dataset: &Dataset,
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    let (train, test) =
        stratified_indices(dataset.labels(), dataset.num_classes(), train_fraction, rng)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

/// Seeded stratified train/test split.
pub fn stratified_split(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    stratified_split_with(dataset, train_fraction, &mut seeded_rng(seed))
}
