//! Seeded synthetic classification problems with known informative columns.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::rng::seeded_rng;

/// Two balanced classes. The first `informative` columns are Gaussian around
/// `0.5 -/+ separation / 2` (class 0 / class 1) with standard deviation
/// `spread`; the remaining `noise` columns are uniform on `[0, 1]`.
pub fn gaussian_informative(
    n_samples: usize,
    informative: usize,
    noise: usize,
    separation: f64,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_samples < 4 || informative + noise == 0 {
        return Err(invalid("need at least 4 samples and 1 feature"));
    }
    let normal = Normal::new(0.0, spread).map_err(|e| invalid(e.to_string()))?;
    let mut rng = seeded_rng(seed);
    let mut rows = Vec::with_capacity(n_samples);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let label = i % 2;
        let centre = 0.5
            + if label == 1 {
                separation / 2.0
            } else {
                -separation / 2.0
            };
        let mut row = Vec::with_capacity(informative + noise);
        for _ in 0..informative {
            row.push(centre + normal.sample(&mut rng));
        }
        for _ in 0..noise {
            row.push(rng.gen::<f64>());
        }
        rows.push(row);
        labels.push(label);
    }
    let names = (0..informative)
        .map(|i| format!("info{i}"))
        .chain((0..noise).map(|i| format!("noise{i}")))
        .collect();
    Dataset::new(rows, labels, names, vec!["neg".into(), "pos".into()])
}

/// Column 0 separates the two classes perfectly (class 0 in `[0, 0.4)`,
/// class 1 in `[0.6, 1)`); the other `noise` columns are uniform.
pub fn single_separating(n_samples: usize, noise: usize, seed: u64) -> Result<Dataset> {
    if n_samples < 4 {
        return Err(invalid("need at least 4 samples"));
    }
    let mut rng = seeded_rng(seed);
    let mut rows = Vec::with_capacity(n_samples);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let label = i % 2;
        let mut row = vec![0.6 * label as f64 + 0.4 * rng.gen::<f64>()];
        row.extend((0..noise).map(|_| rng.gen::<f64>()));
        rows.push(row);
        labels.push(label);
    }
    let names = std::iter::once("signal".to_string())
        .chain((0..noise).map(|i| format!("noise{i}")))
        .collect();
    Dataset::new(rows, labels, names, vec!["neg".into(), "pos".into()])
}
