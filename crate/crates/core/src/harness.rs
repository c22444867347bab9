//! Baselines, the exhaustive oracle and multi-seed experiments.

use std::collections::HashSet;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binary::{
    select_on_partition, wrapper_fitness, FeatureMask, Partition, SelectionResult, WrapperObjective,
};
use crate::classify::{confusion, metrics_from_confusion, ConfusionMatrix, KnnClassifier, Metrics};
use crate::config::RunConfig;
use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::rng::{stream_rng, Stream};

/// One row of the oracle's ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSubset {
    pub mask: FeatureMask,
    pub fitness: f64,
    pub classifier_error: f64,
    pub selected_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_mask: FeatureMask,
    pub best_fitness: f64,
    /// All `2^D - 1` non-empty subsets, best first; equal fitness ranks the
    /// lexicographically smaller mask first.
    pub ranked: Vec<RankedSubset>,
    pub seed: u64,
}

/// Scores every non-empty mask on the partition's fit/validate pair.
pub fn exhaustive_on_partition(
    partition: &Partition,
    config: &RunConfig,
    seed: u64,
) -> Result<OracleResult> {
    let d = partition.fit.n_features();
    if d > config.oracle_limit || d >= 64 {
        return Err(Error::OracleGuard {
            dimension: d,
            limit: config.oracle_limit.min(63),
        });
    }
    let weights = config.weights()?;
    let mut ranked = (1u64..1 << d)
        .into_par_iter()
        .map(|code| {
            let mask = FeatureMask::from_code(d, code);
            let b = wrapper_fitness(
                &mask,
                &partition.fit,
                &partition.validate,
                weights,
                config.knn_k,
            )?;
            Ok(RankedSubset {
                mask,
                fitness: b.fitness,
                classifier_error: b.classifier_error,
                selected_count: b.selected_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|x, y| {
        x.fitness
            .total_cmp(&y.fitness)
            .then_with(|| x.mask.cmp(&y.mask))
    });
    let best = &ranked[0];
    Ok(OracleResult {
        best_mask: best.mask.clone(),
        best_fitness: best.fitness,
        ranked,
        seed,
    })
}

/// Exhaustive search under the same split protocol as [`crate::binary::select_features`].
pub fn exhaustive_oracle(dataset: &Dataset, config: &RunConfig, seed: u64) -> Result<OracleResult> {
    config.validate()?;
    if dataset.n_features() > config.oracle_limit {
        return Err(Error::OracleGuard {
            dimension: dataset.n_features(),
            limit: config.oracle_limit,
        });
    }
    let partition = Partition::prepare(dataset, config, seed)?;
    exhaustive_on_partition(&partition, config, seed)
}

fn random_nonempty_mask<R: Rng + ?Sized>(d: usize, rng: &mut R) -> FeatureMask {
    loop {
        let mask = FeatureMask::new((0..d).map(|_| rng.gen::<bool>()).collect());
        if mask.any() {
            return mask;
        }
    }
}

/// Best of `budget` uniformly drawn non-empty masks. With `dedup`, repeats
/// are redrawn so every evaluation scores a new mask (the budget is capped
/// at the number of distinct masks). `fitness_history` holds the running
/// best after every evaluation.
pub fn random_search_on(
    partition: &Partition,
    config: &RunConfig,
    budget: usize,
    seed: u64,
    dedup: bool,
) -> Result<SelectionResult> {
    if budget == 0 {
        return Err(invalid("random search budget must be at least 1"));
    }
    let d = partition.fit.n_features();
    let budget = if dedup && d < 64 {
        budget.min(((1u128 << d) - 1).min(usize::MAX as u128) as usize)
    } else {
        budget
    };
    let mut objective = WrapperObjective::new(&partition.fit, &partition.validate, config)?;
    let mut rng = stream_rng(seed, Stream::Baseline);
    let mut seen: HashSet<FeatureMask> = HashSet::new();
    let mut best: Option<(FeatureMask, crate::binary::FitnessBreakdown)> = None;
    let mut history = Vec::with_capacity(budget);
    for _ in 0..budget {
        let mask = loop {
            let m = random_nonempty_mask(d, &mut rng);
            if !dedup || seen.insert(m.clone()) {
                break m;
            }
        };
        let b = objective.evaluate_mask(&mask)?;
        if best.as_ref().is_none_or(|(_, cur)| b.fitness < cur.fitness) {
            best = Some((mask, b));
        }
        history.push(
            best.as_ref()
                .map(|(_, b)| b.fitness)
                .unwrap_or(f64::INFINITY),
        );
    }
    let (mask, breakdown) = best.expect("budget >= 1");
    let initial = history[0];
    Ok(SelectionResult::from_breakdown(
        mask, breakdown, initial, history, budget, seed,
    ))
}

/// Random-search baseline on the split derived from `config.seed`.
pub fn random_search(
    dataset: &Dataset,
    config: &RunConfig,
    budget: usize,
    dedup: bool,
) -> Result<SelectionResult> {
    config.validate()?;
    let partition = Partition::prepare(dataset, config, config.seed)?;
    random_search_on(&partition, config, budget, config.seed, dedup)
}

/// Test-set quality of a mask: KNN trained on the full training portion.
pub fn evaluate_on_test(
    partition: &Partition,
    mask: &FeatureMask,
    k: usize,
) -> Result<(Metrics, ConfusionMatrix)> {
    let knn = KnnClassifier::new(&partition.train, mask.selected(), k)?;
    let predictions = knn.predict_all(&partition.test);
    let cm = confusion(
        &predictions,
        partition.test.labels(),
        partition.test.num_classes(),
    )?;
    Ok((metrics_from_confusion(&cm)?, cm))
}

/// Summary statistics over seeds. `std` is the population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "statistics of an empty sample");
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub fitness: f64,
    pub classifier_error: f64,
    pub selected_count: usize,
    pub evaluations: usize,
    pub mask: FeatureMask,
    pub test: Metrics,
}

/// Everything recorded for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub selection: SelectionResult,
    pub selected_features: Vec<String>,
    pub test: Metrics,
    pub confusion: ConfusionMatrix,
    pub baseline: Option<BaselineRun>,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub accuracy: Stats,
    pub precision: Stats,
    pub recall: Stats,
    pub f1: Stats,
    pub fitness: Stats,
    pub selected_count: Stats,
    pub test_support: u64,
    pub baseline_accuracy: Option<Stats>,
    pub baseline_fitness: Option<Stats>,
}

impl Summary {
    pub fn from_runs(runs: &[SeedRun]) -> Self {
        let stat = |f: &dyn Fn(&SeedRun) -> f64| Stats::of(&runs.iter().map(f).collect::<Vec<_>>());
        let baselines: Vec<&BaselineRun> =
            runs.iter().filter_map(|r| r.baseline.as_ref()).collect();
        let all_baselines = !baselines.is_empty() && baselines.len() == runs.len();
        Self {
            runs: runs.len(),
            accuracy: stat(&|r| r.test.accuracy),
            precision: stat(&|r| r.test.precision),
            recall: stat(&|r| r.test.recall),
            f1: stat(&|r| r.test.f1),
            fitness: stat(&|r| r.selection.fitness),
            selected_count: stat(&|r| r.selection.selected_count as f64),
            test_support: runs.first().map(|r| r.test.support).unwrap_or(0),
            baseline_accuracy: all_baselines.then(|| {
                Stats::of(
                    &baselines
                        .iter()
                        .map(|b| b.test.accuracy)
                        .collect::<Vec<_>>(),
                )
            }),
            baseline_fitness: all_baselines
                .then(|| Stats::of(&baselines.iter().map(|b| b.fitness).collect::<Vec<_>>())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub runs: Vec<SeedRun>,
    pub summary: Summary,
}

impl ExperimentReport {
    pub fn from_runs(runs: Vec<SeedRun>) -> Result<Self> {
        if runs.is_empty() {
            return Err(invalid("an experiment needs at least one run"));
        }
        let summary = Summary::from_runs(&runs);
        Ok(Self { runs, summary })
    }
}

/// One seed: split, search, evaluate on the untouched test portion.
pub fn run_seed(dataset: &Dataset, config: &RunConfig, seed: u64) -> Result<SeedRun> {
    let started = Instant::now();
    let partition = Partition::prepare(dataset, config, seed)?;
    let selection = select_on_partition(&partition, config, seed)?;
    let (test, cm) = evaluate_on_test(&partition, &selection.mask, config.knn_k)?;
    let baseline = if config.baseline {
        let mut rs = random_search_on(&partition, config, selection.evaluations, seed, false)?;
        rs.fitness_history.clear();
        let (metrics, _) = evaluate_on_test(&partition, &rs.mask, config.knn_k)?;
        Some(BaselineRun {
            fitness: rs.fitness,
            classifier_error: rs.classifier_error,
            selected_count: rs.selected_count,
            evaluations: rs.evaluations,
            mask: rs.mask,
            test: metrics,
        })
    } else {
        None
    };
    let names = dataset.feature_names();
    Ok(SeedRun {
        seed,
        selected_features: selection
            .mask
            .selected()
            .into_iter()
            .map(|i| names[i].clone())
            .collect(),
        selection,
        test,
        confusion: cm,
        baseline,
        elapsed_secs: started.elapsed().as_secs_f64(),
    })
}

/// Runs seeds `config.seed .. config.seed + config.num_seeds` (in parallel)
/// and aggregates them in seed order.
pub fn run_experiment(dataset: &Dataset, config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if dataset.populated_classes() < 2 {
        return Err(invalid("feature selection needs at least two classes"));
    }
    let seeds: Vec<u64> = (0..config.num_seeds as u64)
        .map(|i| config.seed + i)
        .collect();
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            run_seed(dataset, config, seed).map_err(|e| Error::Seed {
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ExperimentReport::from_runs(runs)
}
