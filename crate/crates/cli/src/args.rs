use std::path::PathBuf;

use bcddo::RunConfig;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "bcddo",
    version,
    about = "Binary CDDO wrapper feature selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run BCDDO feature selection over consecutive seeds and write a JSON report.
    Select(RunArgs),
    /// Rank every non-empty feature subset by wrapper fitness.
    Oracle(RunArgs),
    /// Merge report files into one comparison table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat `key = value` config file; flags given on the command line win.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Print the effective configuration and exit.
    #[arg(long)]
    pub dump_config: bool,

    /// Number of ranked subsets printed by `oracle` (the report keeps all).
    #[arg(long, default_value_t = 10)]
    pub top: usize,

    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Reports written by `select` or `oracle`.
    #[arg(required = true, value_name = "REPORT")]
    pub reports: Vec<PathBuf>,

    /// Also write the comparison as JSON.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

/// One optional flag per config key.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// CSV file to load.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Label column, by header name or 0-based index (default: last column).
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub has_header: Option<bool>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub population_size: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub cr: Option<f64>,
    #[arg(long)]
    pub sr_init: Option<f64>,
    #[arg(long)]
    pub lr_init: Option<f64>,
    #[arg(long)]
    pub pattern_size: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub lower_bound: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub upper_bound: Option<f64>,
    /// clamp, reflect, wrap or random.
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub weight_a: Option<f64>,
    #[arg(long)]
    pub knn_k: Option<usize>,
    #[arg(long)]
    pub gr_tolerance: Option<f64>,
    /// First seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub num_seeds: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub fixed_rates: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub normalize_train_only: Option<bool>,
    #[arg(long)]
    pub oracle_limit: Option<usize>,
    /// Also run random search at the same evaluation budget.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub baseline: Option<bool>,
    /// Report path (default: $BCDDO_OUTPUT_DIR or the current directory).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl Overrides {
    /// The flags that were given, as config key/value pairs.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        fn put<T: ToString>(
            out: &mut Vec<(&'static str, String)>,
            key: &'static str,
            v: &Option<T>,
        ) {
            if let Some(v) = v {
                out.push((key, v.to_string()));
            }
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let mut out = Vec::new();
        put(&mut out, "dataset", &path(&self.dataset));
        put(&mut out, "label", &self.label);
        put(&mut out, "has-header", &self.has_header);
        put(&mut out, "train-fraction", &self.train_fraction);
        put(&mut out, "population-size", &self.population_size);
        put(&mut out, "max-iterations", &self.max_iterations);
        put(&mut out, "cr", &self.cr);
        put(&mut out, "sr-init", &self.sr_init);
        put(&mut out, "lr-init", &self.lr_init);
        put(&mut out, "pattern-size", &self.pattern_size);
        put(&mut out, "lower-bound", &self.lower_bound);
        put(&mut out, "upper-bound", &self.upper_bound);
        put(&mut out, "boundary", &self.boundary);
        put(&mut out, "threshold", &self.threshold);
        put(&mut out, "weight-a", &self.weight_a);
        put(&mut out, "knn-k", &self.knn_k);
        put(&mut out, "gr-tolerance", &self.gr_tolerance);
        put(&mut out, "seed", &self.seed);
        put(&mut out, "num-seeds", &self.num_seeds);
        put(&mut out, "fixed-rates", &self.fixed_rates);
        put(&mut out, "normalize-train-only", &self.normalize_train_only);
        put(&mut out, "oracle-limit", &self.oracle_limit);
        put(&mut out, "baseline", &self.baseline);
        put(&mut out, "output", &path(&self.output));
        out
    }

    pub fn apply(&self, config: &mut RunConfig) -> bcddo::Result<()> {
        for (key, value) in self.pairs() {
            config.set(key, &value)?;
        }
        Ok(())
    }
}
