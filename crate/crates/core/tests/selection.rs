use std::path::PathBuf;

use bcddo::binary::{repair_mask, select_on_partition, FeatureMask, FitnessWeights, Partition};
use bcddo::harness::{
    exhaustive_oracle, random_search, random_search_on, run_experiment, Stats, Summary,
};
use bcddo::synthetic::{gaussian_informative, single_separating};
use bcddo::{load_csv, select_features, LabelColumn, RunConfig};
use proptest::prelude::*;

fn quick() -> RunConfig {
    RunConfig {
        population_size: 10,
        max_iterations: 20,
        num_seeds: 3,
        ..RunConfig::default()
    }
}

#[test]
fn repair_examples() {
    let keep = FeatureMask::new(vec![true, false, true]);
    assert_eq!(repair_mask(keep.clone(), &[0.9, 0.1, 0.8]), keep);
    let empty = FeatureMask::new(vec![false; 3]);
    assert_eq!(
        repair_mask(empty.clone(), &[0.1, 0.4, 0.2]).bits(),
        &[false, true, false]
    );
    assert_eq!(
        repair_mask(FeatureMask::new(vec![false; 2]), &[0.3, 0.3]).bits(),
        &[true, false]
    );
}

#[test]
fn separating_feature_is_found() {
    let ds = single_separating(200, 7, 5).unwrap();
    let config = RunConfig::default();
    let oracle = exhaustive_oracle(&ds, &config, 0).unwrap();
    assert_eq!(oracle.best_mask, FeatureMask::from_indices(8, &[0]));
    let hits = (0..10)
        .filter(|&seed| {
            let r = select_features(
                &ds,
                &RunConfig {
                    seed,
                    ..config.clone()
                },
            )
            .unwrap();
            r.mask.bits()[0]
        })
        .count();
    assert!(hits >= 8, "feature 0 chosen in {hits}/10 seeds");
}

#[test]
fn iris_selection_stays_within_feature_count() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/iris.csv");
    let ds = load_csv(&path, &LabelColumn::Last, true).unwrap();
    let r = select_features(&ds, &RunConfig::default()).unwrap();
    assert!((1..=4).contains(&r.selected_count));
}

#[test]
fn breast_cancer_never_keeps_every_feature() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/breast_cancer.csv");
    let ds = load_csv(&path, &LabelColumn::Last, true).unwrap();
    let report = run_experiment(&ds, &RunConfig::default()).unwrap();
    let below = report
        .runs
        .iter()
        .filter(|r| r.selection.selected_count < 30)
        .count();
    assert!(below >= 9, "{below}/10 seeds dropped features");
}

#[test]
fn single_class_is_rejected() {
    let ds = bcddo::Dataset::new(
        vec![vec![0.1, 0.2], vec![0.3, 0.4], vec![0.5, 0.6]],
        vec![0, 0, 0],
        vec!["a".into(), "b".into()],
        vec!["only".into()],
    )
    .unwrap();
    assert!(select_features(&ds, &quick()).is_err());
    assert!(run_experiment(&ds, &quick()).is_err());
}

#[test]
fn weight_one_reports_plain_error() {
    let ds = gaussian_informative(120, 2, 3, 0.3, 0.15, 2).unwrap();
    let r = select_features(
        &ds,
        &RunConfig {
            weight_a: 1.0,
            ..quick()
        },
    )
    .unwrap();
    assert_eq!(r.fitness, r.classifier_error);
}

#[test]
fn oracle_rejects_wide_data() {
    let ds = gaussian_informative(40, 2, 20, 0.3, 0.15, 2).unwrap();
    let err = exhaustive_oracle(&ds, &RunConfig::default(), 0).unwrap_err();
    assert!(matches!(
        err,
        bcddo::Error::OracleGuard {
            dimension: 22,
            limit: 20
        }
    ));
}

#[test]
fn random_search_behaviour() {
    let ds = gaussian_informative(160, 2, 3, 0.3, 0.15, 9).unwrap();
    let config = RunConfig::default();
    let one = random_search(&ds, &config, 1, false).unwrap();
    assert_eq!(one.evaluations, 1);
    assert_eq!(one.fitness_history, vec![one.fitness]);

    let oracle = exhaustive_oracle(&ds, &config, config.seed).unwrap();
    let full = random_search(&ds, &config, 31, true).unwrap();
    assert_eq!(full.mask, oracle.best_mask);
    assert_eq!(full.fitness, oracle.best_fitness);

    let a = random_search(&ds, &config, 40, false).unwrap();
    assert_eq!(a, random_search(&ds, &config, 40, false).unwrap());
    assert!(a.fitness_history.windows(2).all(|w| w[1] <= w[0]));
    let shorter = random_search(&ds, &config, 15, false).unwrap();
    assert_eq!(shorter.fitness_history[..], a.fitness_history[..15]);
    assert!(a.fitness <= shorter.fitness);
}

#[test]
fn experiment_statistics_are_recomputable() {
    let ds = gaussian_informative(120, 2, 4, 0.3, 0.15, 4).unwrap();
    let report = run_experiment(
        &ds,
        &RunConfig {
            baseline: true,
            ..quick()
        },
    )
    .unwrap();
    assert_eq!(
        report.runs.iter().map(|r| r.seed).collect::<Vec<_>>(),
        vec![0, 1, 2]
    );
    assert_eq!(Summary::from_runs(&report.runs), report.summary);
    let acc: Vec<f64> = report.runs.iter().map(|r| r.test.accuracy).collect();
    assert_eq!(report.summary.accuracy, Stats::of(&acc));
    assert!(report.runs.iter().all(|r| r.baseline.is_some()));

    let single = run_experiment(
        &ds,
        &RunConfig {
            num_seeds: 1,
            seed: 5,
            ..quick()
        },
    )
    .unwrap();
    let run = &single.runs[0];
    assert_eq!(single.summary.accuracy.mean, run.test.accuracy);
    assert_eq!(single.summary.fitness.min, run.selection.fitness);
    assert_eq!(single.summary.selected_count.std, 0.0);
}

fn partition_strategy() -> impl Strategy<Value = (u64, u64, usize, usize)> {
    (any::<u64>(), 0u64..50, 1usize..4, 1usize..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nothing_beats_the_oracle((data_seed, seed, informative, noise) in partition_strategy()) {
        let ds = gaussian_informative(80, informative, noise, 0.3, 0.15, data_seed).unwrap();
        let config = quick();
        let p = Partition::prepare(&ds, &config, seed).unwrap();
        let oracle = bcddo::harness::exhaustive_on_partition(&p, &config, seed).unwrap();
        let s = select_on_partition(&p, &config, seed).unwrap();
        let r = random_search_on(&p, &config, 20, seed, false).unwrap();
        prop_assert!(s.fitness >= oracle.best_fitness);
        prop_assert!(r.fitness >= oracle.best_fitness);
        let w = config.weights().unwrap();
        let direct = w.a() * s.classifier_error + w.b() * s.selected_count as f64 / s.total_features as f64;
        prop_assert!((s.fitness - direct).abs() <= 1e-12);
        prop_assert!(s.fitness_history.windows(2).all(|h| h[1] <= h[0]));
    }
}

proptest! {
    #[test]
    fn size_penalty_is_strictly_monotone(a in 0.01f64..0.99, err in 0.0f64..=1.0, total in 2usize..200, sel in 1usize..200) {
        prop_assume!(sel < total);
        let w = FitnessWeights::new(a).unwrap();
        prop_assert!(w.combine(err, sel + 1, total) > w.combine(err, sel, total));
        let f = w.combine(err, sel, total);
        prop_assert!((0.0..=1.0).contains(&f));
    }
}
