//! Binary CDDO for wrapper feature selection.
//!
//! The continuous optimizer searches `[0, 1]^D`; a position selects feature
//! `i` iff its `i`-th component exceeds the threshold. A mask is scored by
//! `a * knn_error + (1 - a) * selected / D` on a held-out validation part of
//! the training data.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cddo::optimize;
use crate::classify::{error_rate, stratified_split_with, KnnClassifier};
use crate::config::RunConfig;
use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::rng::{stream_rng, Stream};

/// Share of the training portion used to fit the KNN during search; the
/// rest scores candidate masks.
pub const FIT_FRACTION: f64 = 0.8;

/// Which features participate in classification.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureMask(Vec<bool>);

impl FeatureMask {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut bits = vec![false; len];
        for &i in indices {
            bits[i] = true;
        }
        Self(bits)
    }

    /// Mask whose bit `i` is bit `i` of `code` (bit 0 is the first feature).
    pub fn from_code(len: usize, code: u64) -> Self {
        Self((0..len).map(|i| code >> i & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.0.iter().any(|&b| b)
    }

    pub fn selected(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Weights of the error and size terms. The size weight is always `1 - a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights {
    a: f64,
}

impl FitnessWeights {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(invalid(format!("weight a must lie in (0, 1], got {a}")));
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        1.0 - self.a
    }

    pub fn combine(&self, classifier_error: f64, selected: usize, total: usize) -> f64 {
        self.a * classifier_error + self.b() * (selected as f64 / total as f64)
    }
}

impl Default for FitnessWeights {
    fn default() -> Self {
        Self { a: 0.90 }
    }
}

/// Bit `i` is set iff `position[i] > threshold`.
pub fn binarize(position: &[f64], threshold: f64) -> FeatureMask {
    FeatureMask(position.iter().map(|&x| x > threshold).collect())
}

/// An empty mask gets the single feature with the largest position component
/// (lowest index on ties). Non-empty masks pass through.
pub fn repair_mask(mask: FeatureMask, position: &[f64]) -> FeatureMask {
    if mask.any() || mask.is_empty() {
        return mask;
    }
    let mut best = 0;
    for (i, &x) in position.iter().enumerate() {
        if x > position[best] {
            best = i;
        }
    }
    let mut bits = mask.0;
    bits[best] = true;
    FeatureMask(bits)
}

/// Wrapper fitness together with its two ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessBreakdown {
    pub fitness: f64,
    pub classifier_error: f64,
    pub selected_count: usize,
    pub total_features: usize,
}

/// Scores `mask` by training KNN on `train` and measuring its error on `validate`.
pub fn wrapper_fitness(
    mask: &FeatureMask,
    train: &Dataset,
    validate: &Dataset,
    weights: FitnessWeights,
    k: usize,
) -> Result<FitnessBreakdown> {
    if validate.n_samples() == 0 {
        return Err(invalid("validation set is empty"));
    }
    if train.n_features() != validate.n_features() || mask.len() != train.n_features() {
        return Err(invalid(format!(
            "schema mismatch: mask {}, train {}, validate {} features",
            mask.len(),
            train.n_features(),
            validate.n_features()
        )));
    }
    let selected = mask.selected();
    if selected.is_empty() {
        return Err(invalid("mask selects no features"));
    }
    let knn = KnnClassifier::new(train, selected, k)?;
    let predictions = knn.predict_all(validate);
    let classifier_error = error_rate(&predictions, validate.labels())?;
    let selected_count = mask.count();
    Ok(FitnessBreakdown {
        fitness: weights.combine(classifier_error, selected_count, mask.len()),
        classifier_error,
        selected_count,
        total_features: mask.len(),
    })
}

/// The four views of one seeded split: `train`/`test` (outer split) and
/// `fit`/`validate` (the training portion split again for the search).
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub train: Dataset,
    pub test: Dataset,
    pub fit: Dataset,
    pub validate: Dataset,
}

impl Partition {
    /// Normalizes (unless already done) and splits `dataset`. By default the
    /// min-max ranges come from the whole dataset; with
    /// `normalize_train_only` they come from the training portion.
    pub fn prepare(dataset: &Dataset, config: &RunConfig, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, Stream::TestSplit);
        let (train, test) = if dataset.is_normalized() {
            stratified_split_with(dataset, config.train_fraction, &mut rng)?
        } else if config.normalize_train_only {
            let (train, test) = stratified_split_with(dataset, config.train_fraction, &mut rng)?;
            let scales = train.column_ranges();
            (train.apply_scaling(&scales)?, test.apply_scaling(&scales)?)
        } else {
            let normalized = dataset.normalize_minmax()?;
            stratified_split_with(&normalized, config.train_fraction, &mut rng)?
        };
        let mut rng = stream_rng(seed, Stream::ValidationSplit);
        let (fit, validate) = stratified_split_with(&train, FIT_FRACTION, &mut rng)?;
        Ok(Self {
            train,
            test,
            fit,
            validate,
        })
    }
}

/// Memoizing wrapper-fitness evaluator over a fixed fit/validate pair.
pub struct WrapperObjective<'a> {
    fit: &'a Dataset,
    validate: &'a Dataset,
    weights: FitnessWeights,
    k: usize,
    threshold: f64,
    cache: HashMap<FeatureMask, FitnessBreakdown>,
}

impl<'a> WrapperObjective<'a> {
    pub fn new(fit: &'a Dataset, validate: &'a Dataset, config: &RunConfig) -> Result<Self> {
        Ok(Self {
            fit,
            validate,
            weights: config.weights()?,
            k: config.knn_k,
            threshold: config.threshold,
            cache: HashMap::new(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.fit.n_features()
    }

    pub fn mask_for(&self, position: &[f64]) -> FeatureMask {
        repair_mask(binarize(position, self.threshold), position)
    }

    pub fn evaluate_mask(&mut self, mask: &FeatureMask) -> Result<FitnessBreakdown> {
        if let Some(hit) = self.cache.get(mask) {
            return Ok(*hit);
        }
        let value = wrapper_fitness(mask, self.fit, self.validate, self.weights, self.k)?;
        self.cache.insert(mask.clone(), value);
        Ok(value)
    }

    pub fn evaluate_position(&mut self, position: &[f64]) -> Result<f64> {
        let mask = self.mask_for(position);
        Ok(self.evaluate_mask(&mask)?.fitness)
    }

    /// Number of distinct masks scored so far.
    pub fn distinct_masks(&self) -> usize {
        self.cache.len()
    }
}

/// Outcome of one feature-selection search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub mask: FeatureMask,
    pub fitness: f64,
    pub classifier_error: f64,
    pub selected_count: usize,
    pub total_features: usize,
    /// Best fitness after initialization.
    pub initial_fitness: f64,
    /// Best fitness after every iteration.
    pub fitness_history: Vec<f64>,
    /// Fitness function calls made by the search.
    pub evaluations: usize,
    pub seed: u64,
}

impl SelectionResult {
    pub(crate) fn from_breakdown(
        mask: FeatureMask,
        b: FitnessBreakdown,
        initial_fitness: f64,
        fitness_history: Vec<f64>,
        evaluations: usize,
        seed: u64,
    ) -> Self {
        Self {
            mask,
            fitness: b.fitness,
            classifier_error: b.classifier_error,
            selected_count: b.selected_count,
            total_features: b.total_features,
            initial_fitness,
            fitness_history,
            evaluations,
            seed,
        }
    }
}

fn check_selectable(dataset: &Dataset) -> Result<()> {
    if dataset.populated_classes() < 2 {
        return Err(invalid("feature selection needs at least two classes"));
    }
    Ok(())
}

/// Runs the binary search on an already prepared partition.
pub fn select_on_partition(
    partition: &Partition,
    config: &RunConfig,
    seed: u64,
) -> Result<SelectionResult> {
    check_selectable(&partition.fit)?;
    let params = config.cddo_params(seed)?;
    let mut objective = WrapperObjective::new(&partition.fit, &partition.validate, config)?;
    let dimension = objective.n_features();
    let mut rng = stream_rng(seed, Stream::Search);
    let run = optimize(
        &params,
        dimension,
        |x: &[f64]| objective.evaluate_position(x),
        &mut rng,
    )?;
    let mask = objective.mask_for(&run.best_position);
    let breakdown = objective.evaluate_mask(&mask)?;
    Ok(SelectionResult::from_breakdown(
        mask,
        breakdown,
        run.initial_best_fitness,
        run.fitness_history,
        run.evaluations,
        seed,
    ))
}

/// Splits `dataset` with `config.seed` and searches for the best feature mask.
pub fn select_features(dataset: &Dataset, config: &RunConfig) -> Result<SelectionResult> {
    config.validate()?;
    check_selectable(dataset)?;
    let partition = Partition::prepare(dataset, config, config.seed)?;
    select_on_partition(&partition, config, config.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binarize_strict_threshold() {
        assert_eq!(
            binarize(&[0.7, 0.3, 0.5], 0.5).bits(),
            &[true, false, false]
        );
        assert!(!binarize(&[0.0; 4], 0.5).any());
        let m = binarize(&[0.9, 0.6, 0.2, 0.51, 0.75, 0.4], 0.5);
        assert_eq!(m.count(), 4);
        assert_eq!(m.to_string(), "110110");
    }

    #[test]
    fn repair_cases() {
        let m = FeatureMask::new(vec![true, false, true]);
        assert_eq!(repair_mask(m.clone(), &[0.0, 0.0, 0.0]), m);
        let fixed = repair_mask(FeatureMask::new(vec![false; 3]), &[0.1, 0.4, 0.2]);
        assert_eq!(fixed.bits(), &[false, true, false]);
        let tie = repair_mask(FeatureMask::new(vec![false; 2]), &[0.3, 0.3]);
        assert_eq!(tie.bits(), &[true, false]);
    }

    #[test]
    fn weights() {
        let w = FitnessWeights::new(0.9).unwrap();
        assert!((w.combine(0.1, 5, 10) - 0.14).abs() < 1e-15);
        assert_eq!(w.combine(0.0, 1, 8), w.b() / 8.0);
        let exact = FitnessWeights::new(1.0).unwrap();
        assert_eq!(exact.b(), 0.0);
        assert_eq!(exact.combine(0.37, 3, 4), 0.37);
        assert!(FitnessWeights::new(0.0).is_err());
        assert!(FitnessWeights::new(1.1).is_err());
        assert_eq!(FitnessWeights::default().a(), 0.9);
    }

    #[test]
    fn mask_codes_and_indices() {
        let m = FeatureMask::from_code(4, 0b0101);
        assert_eq!(m.bits(), &[true, false, true, false]);
        assert_eq!(m.selected(), vec![0, 2]);
        assert_eq!(FeatureMask::from_indices(4, &[0, 2]), m);
    }

    fn toy() -> (Dataset, Dataset) {
        // feature 0 separates the classes, feature 1 points the wrong way
        let train = Dataset::new(
            vec![
                vec![0.0, 1.0],
                vec![0.1, 0.9],
                vec![1.0, 0.0],
                vec![0.9, 0.1],
            ],
            vec![0, 0, 1, 1],
            vec!["good".into(), "bad".into()],
            vec!["n".into(), "p".into()],
        )
        .unwrap();
        let validate = Dataset::new(
            vec![vec![0.05, 0.0], vec![0.95, 1.0]],
            vec![0, 1],
            vec!["good".into(), "bad".into()],
            vec!["n".into(), "p".into()],
        )
        .unwrap();
        (train, validate)
    }

    #[test]
    fn wrapper_fitness_decomposes() {
        let (train, validate) = toy();
        let w = FitnessWeights::default();
        let good = wrapper_fitness(
            &FeatureMask::new(vec![true, false]),
            &train,
            &validate,
            w,
            1,
        )
        .unwrap();
        assert_eq!(good.classifier_error, 0.0);
        assert_eq!(good.fitness, w.b() * 0.5);
        let bad = wrapper_fitness(
            &FeatureMask::new(vec![false, true]),
            &train,
            &validate,
            w,
            1,
        )
        .unwrap();
        assert_eq!(bad.classifier_error, 1.0);
        assert!(bad.fitness > good.fitness);
    }

    #[test]
    fn wrapper_fitness_errors() {
        let (train, validate) = toy();
        let w = FitnessWeights::default();
        let empty_validate = validate.subset(&[]);
        assert!(wrapper_fitness(
            &FeatureMask::new(vec![true, false]),
            &train,
            &empty_validate,
            w,
            1
        )
        .is_err());
        assert!(wrapper_fitness(
            &FeatureMask::new(vec![false, false]),
            &train,
            &validate,
            w,
            1
        )
        .is_err());
        assert!(wrapper_fitness(&FeatureMask::new(vec![true]), &train, &validate, w, 1).is_err());
    }

    #[test]
    fn single_class_is_rejected() {
        let ds = Dataset::new(
            (0..10).map(|i| vec![i as f64, 1.0]).collect(),
            vec![0; 10],
            vec!["a".into(), "b".into()],
            vec!["only".into()],
        )
        .unwrap();
        assert!(select_features(&ds, &RunConfig::default()).is_err());
    }
}
