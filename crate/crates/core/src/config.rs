//! Run configuration and its flat `key = value` text form.
//!
//! Keys are the kebab-case field names. Blank lines and lines starting with
//! `#` are ignored; later assignments override earlier ones.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::binary::FitnessWeights;
use crate::cddo::{BoundaryPolicy, Bounds, CddoParams};
use crate::data::LabelColumn;
use crate::error::{invalid, Result};

/// Every tunable of a feature-selection experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    /// Label column by header name or 0-based index; empty means last column.
    pub label: String,
    pub has_header: bool,
    pub train_fraction: f64,
    pub population_size: usize,
    pub max_iterations: usize,
    pub cr: f64,
    pub sr_init: f64,
    pub lr_init: f64,
    pub pattern_size: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub boundary: BoundaryPolicy,
    pub threshold: f64,
    pub weight_a: f64,
    pub knn_k: usize,
    pub gr_tolerance: f64,
    /// First seed; runs use `seed..seed + num_seeds`.
    pub seed: u64,
    pub num_seeds: usize,
    pub fixed_rates: bool,
    /// Fit min-max ranges on the training portion only.
    pub normalize_train_only: bool,
    /// Largest feature count the exhaustive oracle accepts.
    pub oracle_limit: usize,
    /// Also run the random-search baseline at the same evaluation budget.
    pub baseline: bool,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = CddoParams::default();
        Self {
            dataset: None,
            label: String::new(),
            has_header: true,
            train_fraction: 0.70,
            population_size: p.population_size,
            max_iterations: p.max_iterations,
            cr: p.cr,
            sr_init: p.sr_init,
            lr_init: p.lr_init,
            pattern_size: p.pattern_size,
            lower_bound: p.bounds.lower,
            upper_bound: p.bounds.upper,
            boundary: p.boundary,
            threshold: 0.5,
            weight_a: 0.90,
            knn_k: 5,
            gr_tolerance: p.gr_tolerance,
            seed: 0,
            num_seeds: 10,
            fixed_rates: false,
            normalize_train_only: false,
            oracle_limit: 20,
            baseline: false,
            output: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| invalid(format!("{key}: cannot parse {value:?}")))
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl RunConfig {
    pub const KEYS: &'static [&'static str] = &[
        "dataset",
        "label",
        "has-header",
        "train-fraction",
        "population-size",
        "max-iterations",
        "cr",
        "sr-init",
        "lr-init",
        "pattern-size",
        "lower-bound",
        "upper-bound",
        "boundary",
        "threshold",
        "weight-a",
        "knn-k",
        "gr-tolerance",
        "seed",
        "num-seeds",
        "fixed-rates",
        "normalize-train-only",
        "oracle-limit",
        "baseline",
        "output",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "dataset" => self.dataset = opt_path(v),
            "label" => self.label = v.to_string(),
            "has-header" => self.has_header = parse(key, v)?,
            "train-fraction" => self.train_fraction = parse(key, v)?,
            "population-size" => self.population_size = parse(key, v)?,
            "max-iterations" => self.max_iterations = parse(key, v)?,
            "cr" => self.cr = parse(key, v)?,
            "sr-init" => self.sr_init = parse(key, v)?,
            "lr-init" => self.lr_init = parse(key, v)?,
            "pattern-size" => self.pattern_size = parse(key, v)?,
            "lower-bound" => self.lower_bound = parse(key, v)?,
            "upper-bound" => self.upper_bound = parse(key, v)?,
            "boundary" => self.boundary = v.parse()?,
            "threshold" => self.threshold = parse(key, v)?,
            "weight-a" => self.weight_a = parse(key, v)?,
            "knn-k" => self.knn_k = parse(key, v)?,
            "gr-tolerance" => self.gr_tolerance = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "num-seeds" => self.num_seeds = parse(key, v)?,
            "fixed-rates" => self.fixed_rates = parse(key, v)?,
            "normalize-train-only" => self.normalize_train_only = parse(key, v)?,
            "oracle-limit" => self.oracle_limit = parse(key, v)?,
            "baseline" => self.baseline = parse(key, v)?,
            "output" => self.output = opt_path(v),
            other => return Err(invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies every assignment in `text` on top of `self`.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key = value", n + 1)))?;
            self.set(key, value)
                .map_err(|e| invalid(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_kv(text)?;
        Ok(config)
    }

    pub fn to_kv(&self) -> String {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("dataset", path(&self.dataset));
        put("label", self.label.clone());
        put("has-header", self.has_header.to_string());
        put("train-fraction", self.train_fraction.to_string());
        put("population-size", self.population_size.to_string());
        put("max-iterations", self.max_iterations.to_string());
        put("cr", self.cr.to_string());
        put("sr-init", self.sr_init.to_string());
        put("lr-init", self.lr_init.to_string());
        put("pattern-size", self.pattern_size.to_string());
        put("lower-bound", self.lower_bound.to_string());
        put("upper-bound", self.upper_bound.to_string());
        put("boundary", self.boundary.to_string());
        put("threshold", self.threshold.to_string());
        put("weight-a", self.weight_a.to_string());
        put("knn-k", self.knn_k.to_string());
        put("gr-tolerance", self.gr_tolerance.to_string());
        put("seed", self.seed.to_string());
        put("num-seeds", self.num_seeds.to_string());
        put("fixed-rates", self.fixed_rates.to_string());
        put(
            "normalize-train-only",
            self.normalize_train_only.to_string(),
        );
        put("oracle-limit", self.oracle_limit.to_string());
        put("baseline", self.baseline.to_string());
        put("output", path(&self.output));
        s
    }

    pub fn label_column(&self) -> LabelColumn {
        self.label.parse().expect("infallible")
    }

    pub fn weights(&self) -> Result<FitnessWeights> {
        FitnessWeights::new(self.weight_a)
    }

    pub fn cddo_params(&self, seed: u64) -> Result<CddoParams> {
        let params = CddoParams {
            population_size: self.population_size,
            max_iterations: self.max_iterations,
            cr: self.cr,
            sr_init: self.sr_init,
            lr_init: self.lr_init,
            pattern_size: self.pattern_size,
            bounds: Bounds::new(self.lower_bound, self.upper_bound)?,
            boundary: self.boundary,
            gr_tolerance: self.gr_tolerance,
            fixed_rates: self.fixed_rates,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(invalid(format!(
                "train-fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if !self.threshold.is_finite() {
            return Err(invalid("threshold must be finite"));
        }
        if self.knn_k == 0 {
            return Err(invalid("knn-k must be at least 1"));
        }
        if self.num_seeds == 0 {
            return Err(invalid("num-seeds must be at least 1"));
        }
        self.weights()?;
        self.cddo_params(self.seed)?;
        Ok(())
    }
}
