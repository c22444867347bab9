mod args;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bcddo::binary::Partition;
use bcddo::data::{validate, Severity};
use bcddo::harness::{evaluate_on_test, exhaustive_on_partition, run_experiment};
use bcddo::{load_csv, Dataset, RunConfig};
use clap::Parser;
use sha2::{Digest, Sha256};

use args::{Cli, Command, ReportArgs, RunArgs};
use report::{Body, Comparison, DatasetInfo, OracleBody, Provenance, Report, Row};

/// Default directory for reports when `--output` is not given.
pub const OUTPUT_DIR_ENV: &str = "BCDDO_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("run failed: {0}")]
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Select(args) => cmd_select(&args),
        Command::Oracle(args) => cmd_oracle(&args),
        Command::Report(args) => cmd_report(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bcddo: {e}");
            ExitCode::from(e.code())
        }
    }
}

/// Defaults, then the config file, then command-line flags.
fn resolve_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config
            .apply_kv(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    }
    args.overrides
        .apply(&mut config)
        .map_err(|e| CliError::Config(e.to_string()))?;
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

struct Loaded {
    dataset: Dataset,
    info: DatasetInfo,
}

fn load(config: &RunConfig) -> Result<Loaded, CliError> {
    let path = config.dataset.as_deref().ok_or_else(|| {
        CliError::Config("no dataset given (use --dataset or the dataset key)".into())
    })?;
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let dataset = load_csv(path, &config.label_column(), config.has_header)
        .map_err(|e| CliError::Data(e.to_string()))?;

    let mut findings = Vec::new();
    for f in validate(&dataset) {
        match f.severity() {
            Severity::Error => return Err(CliError::Data(format!("{}: {f}", path.display()))),
            Severity::Warning => {
                eprintln!("warning: {}: {f}", path.display());
                findings.push(f.to_string());
            }
        }
    }

    let info = DatasetInfo {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        n_samples: dataset.n_samples(),
        n_features: dataset.n_features(),
        feature_names: dataset.feature_names().to_vec(),
        class_names: dataset.class_names().to_vec(),
        class_counts: dataset.class_counts(),
        findings,
    };
    Ok(Loaded { dataset, info })
}

fn output_path(config: &RunConfig, kind: &str) -> PathBuf {
    if let Some(p) = &config.output {
        return p.clone();
    }
    let dir = std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let stem = config
        .dataset
        .as_deref()
        .and_then(Path::file_stem)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    dir.join(format!("{stem}-{kind}.json"))
}

fn provenance(config: &RunConfig, seeds: Vec<u64>, info: DatasetInfo) -> Provenance {
    Provenance {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        seeds,
        dataset: info,
    }
}

fn cmd_select(args: &RunArgs) -> Result<(), CliError> {
    let config = resolve_config(args)?;
    if args.dump_config {
        print!("{}", config.to_kv());
        return Ok(());
    }
    let Loaded { dataset, info } = load(&config)?;
    let experiment =
        run_experiment(&dataset, &config).map_err(|e| CliError::Runtime(e.to_string()))?;

    let s = &experiment.summary;
    let name = Path::new(&info.path)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    println!(
        "{name}: accuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}  support {}  selected {:.1}/{}  fitness {:.4}  ({} seeds)",
        s.accuracy.mean,
        s.precision.mean,
        s.recall.mean,
        s.f1.mean,
        s.test_support,
        s.selected_count.mean,
        info.n_features,
        s.fitness.mean,
        s.runs,
    );
    if let (Some(acc), Some(fit)) = (&s.baseline_accuracy, &s.baseline_fitness) {
        println!(
            "{name}: random search at equal budget: accuracy {:.4}  fitness {:.4}",
            acc.mean, fit.mean
        );
    }

    let seeds = experiment.runs.iter().map(|r| r.seed).collect();
    let report = Report::new(
        Body::Select { experiment },
        provenance(&config, seeds, info),
    );
    let path = output_path(&config, "select");
    report.write(&path)?;
    println!("report written to {}", path.display());
    Ok(())
}

fn cmd_oracle(args: &RunArgs) -> Result<(), CliError> {
    let config = resolve_config(args)?;
    if args.dump_config {
        print!("{}", config.to_kv());
        return Ok(());
    }
    let Loaded { dataset, info } = load(&config)?;
    let d = dataset.n_features();
    if d > config.oracle_limit {
        return Err(CliError::Config(format!(
            "exhaustive search over {d} features refused: {d} exceeds the limit of {} (raise --oracle-limit to override)",
            config.oracle_limit
        )));
    }

    let run = || -> bcddo::Result<OracleBody> {
        let partition = Partition::prepare(&dataset, &config, config.seed)?;
        let result = exhaustive_on_partition(&partition, &config, config.seed)?;
        let (test, confusion) = evaluate_on_test(&partition, &result.best_mask, config.knn_k)?;
        let names = dataset.feature_names();
        Ok(OracleBody {
            selected_features: result
                .best_mask
                .selected()
                .into_iter()
                .map(|i| names[i].clone())
                .collect(),
            result,
            test,
            confusion,
        })
    };
    let oracle = run().map_err(|e| match e {
        bcddo::Error::OracleGuard { .. } => CliError::Config(e.to_string()),
        e => CliError::Runtime(e.to_string()),
    })?;

    println!(
        "{} subsets ranked; best fitness {:.6} with {} of {d} features: {}",
        oracle.result.ranked.len(),
        oracle.result.best_fitness,
        oracle.result.best_mask.count(),
        oracle.selected_features.join(", "),
    );
    println!(
        "{:>5}  {:<width$}  {:>10}  {:>8}  {:>8}",
        "rank",
        "mask",
        "fitness",
        "error",
        "selected",
        width = d.max(4)
    );
    for (i, r) in oracle.result.ranked.iter().take(args.top).enumerate() {
        println!(
            "{:>5}  {:<width$}  {:>10.6}  {:>8.4}  {:>8}",
            i + 1,
            r.mask.to_string(),
            r.fitness,
            r.classifier_error,
            r.selected_count,
            width = d.max(4)
        );
    }

    let report = Report::new(
        Body::Oracle { oracle },
        provenance(&config, vec![config.seed], info),
    );
    let path = output_path(&config, "oracle");
    report.write(&path)?;
    println!("report written to {}", path.display());
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let rows = args
        .reports
        .iter()
        .map(|p| Report::load(p).map(|r| Row::from_report(p, &r)))
        .collect::<Result<Vec<_>, _>>()?;
    let comparison = Comparison::new(rows);
    print!("{}", comparison.to_text());
    if let Some(path) = &args.output {
        report::write_json(path, &comparison)?;
    }
    Ok(())
}
