//! `wirref`: command-line front end for the first-person-plural referent
//! pipeline. Every command writes its outputs and a manifest into a fresh
//! run directory.

mod commands;
mod config;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Serialize, Serializer};
use serde_json::json;
use wirref_core::corpus::GroupBy;
use wirref_core::eval::Regime;

use commands::{Inputs, ModelKind};
use config::{Aggregator, PipelineConfig};
use run::{commit, default_run_dir, CliResult, RunIdentity, Stage};

#[derive(Parser)]
#[command(
    name = "wirref",
    version,
    about = "Referent disambiguation for German wir/uns/unser-"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Exact run directory to create; must not exist.
    #[arg(long, global = true)]
    run_dir: Option<PathBuf>,
    /// Directory under which run directories are created.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// More log output; repeat for debug level.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

fn file_name<S: Serializer>(path: &Path, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(
        &path
            .file_name()
            .map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
    )
}

fn opt_file_name<S: Serializer>(path: &Option<PathBuf>, s: S) -> Result<S::Ok, S::Error> {
    match path {
        Some(p) => file_name(p, s),
        None => s.serialize_none(),
    }
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Read a corpus file, validate its trees, and write canonical JSONL.
    Ingest {
        #[arg(long)]
        #[serde(serialize_with = "file_name")]
        input: PathBuf,
        /// conllu, xml or jsonl; inferred from the extension when absent.
        #[arg(long)]
        format: Option<String>,
    },
    /// List every wir/uns/unser- token in the corpus.
    Extract {
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Token and pronoun counts per party or speaker.
    Stats {
        #[arg(long, default_value = "party")]
        group_by: GroupBy,
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Inter-annotator agreement; writes gold labels when all disagreements
    /// are resolved.
    Agreement {
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Apply the patterns to the unlabeled corpus as labeling functions.
    LfApply {
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Fit the label model on a label matrix.
    LabelModel {
        #[arg(long)]
        #[serde(serialize_with = "file_name")]
        matrix: PathBuf,
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Aggregate labeling-function votes into silver labels.
    Silver {
        #[arg(long)]
        #[serde(serialize_with = "file_name")]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        aggregator: Option<Aggregator>,
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Draw a per-class sample of silver labels for manual checking.
    SampleReview {
        #[arg(long)]
        per_class: Option<usize>,
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Write sentence pairs, folds and silver pairs for the encoder harness.
    ExportPairs {
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Fit a model on all gold instances.
    Train {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long)]
        regime: Option<Regime>,
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Label every instance of a corpus with a trained model.
    Predict {
        #[arg(long)]
        #[serde(serialize_with = "file_name")]
        model_dir: PathBuf,
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Cross-validate a model on the gold set.
    Cv {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long)]
        regime: Option<Regime>,
        /// Fold assignment to use instead of drawing one.
        #[arg(long)]
        #[serde(serialize_with = "opt_file_name")]
        folds: Option<PathBuf>,
        /// Check every training set against the held-out fold.
        #[arg(long)]
        audit: bool,
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Score a predictions file against gold labels.
    Score {
        #[arg(long)]
        #[serde(serialize_with = "file_name")]
        pred: PathBuf,
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
    /// Per-group referent profiles and their principal components.
    Analyze {
        #[arg(long)]
        group_by: Option<GroupBy>,
        #[arg(long)]
        standardize: bool,
        #[command(flatten)]
        #[serde(skip)]
        inputs: Inputs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Extract { .. } => "extract",
            Command::Stats { .. } => "stats",
            Command::Agreement { .. } => "agreement",
            Command::LfApply { .. } => "lf-apply",
            Command::LabelModel { .. } => "label-model",
            Command::Silver { .. } => "silver",
            Command::SampleReview { .. } => "sample-review",
            Command::ExportPairs { .. } => "export-pairs",
            Command::Train { .. } => "train",
            Command::Predict { .. } => "predict",
            Command::Cv { .. } => "cv",
            Command::Score { .. } => "score",
            Command::Analyze { .. } => "analyze",
        }
    }

    fn inputs(&self) -> Option<&Inputs> {
        match self {
            Command::Ingest { .. } => None,
            Command::Extract { inputs }
            | Command::Stats { inputs, .. }
            | Command::Agreement { inputs }
            | Command::LfApply { inputs }
            | Command::LabelModel { inputs, .. }
            | Command::Silver { inputs, .. }
            | Command::SampleReview { inputs, .. }
            | Command::ExportPairs { inputs }
            | Command::Train { inputs, .. }
            | Command::Predict { inputs, .. }
            | Command::Cv { inputs, .. }
            | Command::Score { inputs, .. }
            | Command::Analyze { inputs, .. } => Some(inputs),
        }
    }
}

fn load_config(cli: &Cli) -> CliResult<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(inputs) = cli.command.inputs() {
        inputs.apply(&mut cfg);
    }
    match &cli.command {
        Command::Silver {
            aggregator: Some(a),
            ..
        } => cfg.silver.aggregator = *a,
        Command::SampleReview {
            per_class: Some(n), ..
        } => cfg.silver.review_per_class = *n,
        Command::Train {
            regime: Some(r), ..
        }
        | Command::Cv {
            regime: Some(r), ..
        } => cfg.regime = *r,
        Command::Analyze {
            group_by,
            standardize,
            ..
        } => {
            if let Some(g) = group_by {
                cfg.analysis.group_by = *g;
            }
            cfg.analysis.standardize |= *standardize;
        }
        _ => {}
    }
    cfg.validate()?;
    let p = &cfg.paths;
    commands::check_paths(&[
        ("corpus", &p.corpus),
        ("unlabeled", &p.unlabeled),
        ("patterns", &p.patterns),
        ("gold", &p.gold),
        ("annotations", &p.annotations),
        ("resolutions", &p.resolutions),
        ("silver", &p.silver),
        ("params", &p.params),
    ])?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> CliResult<()> {
    if let Some(d) = cli.run_dir.as_ref().filter(|d| d.exists()) {
        return Err(run::CliError::Usage(format!(
            "run directory {} already exists",
            d.display()
        )));
    }
    let cfg = load_config(cli)?;
    let mut stage = Stage::default();
    match &cli.command {
        Command::Ingest { input, format } => {
            commands::ingest(&mut stage, input, format.as_deref())?
        }
        Command::Extract { .. } => commands::extract(&mut stage, &cfg)?,
        Command::Stats { group_by, .. } => commands::stats(&mut stage, &cfg, *group_by)?,
        Command::Agreement { .. } => commands::agreement(&mut stage, &cfg)?,
        Command::LfApply { .. } => commands::lf_apply(&mut stage, &cfg)?,
        Command::LabelModel { matrix, .. } => commands::label_model(&mut stage, &cfg, matrix)?,
        Command::Silver { matrix, .. } => commands::silver(&mut stage, &cfg, matrix)?,
        Command::SampleReview { .. } => commands::sample_review(&mut stage, &cfg)?,
        Command::ExportPairs { .. } => commands::export_pairs(&mut stage, &cfg)?,
        Command::Train { model, .. } => commands::train(&mut stage, &cfg, *model)?,
        Command::Predict { model_dir, .. } => commands::predict(&mut stage, &cfg, model_dir)?,
        Command::Cv {
            model,
            folds,
            audit,
            ..
        } => commands::cv(&mut stage, &cfg, *model, folds.as_deref(), *audit)?,
        Command::Score { pred, .. } => commands::score_cmd(&mut stage, &cfg, pred)?,
        Command::Analyze { .. } => commands::analyze(&mut stage, &cfg)?,
    }

    // Input locations are recorded as file names and hashes, so the
    // identity does not depend on where the data lives.
    let mut recorded = cfg.clone();
    recorded.paths = Default::default();
    let identity = RunIdentity {
        command: cli.command.name(),
        config: serde_json::to_value(&recorded).expect("config serializes"),
        arguments: serde_json::to_value(&cli.command).expect("arguments serialize"),
        seeds: json!({
            "folds": cfg.cv.seed,
            "linear": cfg.linear.seed,
            "silver": cfg.silver.seed,
        }),
    };
    let run_dir = match &cli.run_dir {
        Some(d) => d.clone(),
        None => {
            let base = cli
                .output_dir
                .clone()
                .or_else(|| cfg.paths.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("runs"));
            default_run_dir(&base, identity.command, &identity.hash())
        }
    };
    let message = std::mem::take(&mut stage.message);
    commit(&run_dir, &identity, stage)?;
    // A closed stdout must not turn a finished run into a failure.
    let mut out = std::io::stdout().lock();
    if !message.is_empty() {
        let _ = writeln!(out, "{}", message.trim_end());
    }
    let _ = writeln!(out, "run directory: {}", run_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match std::panic::catch_unwind(|| execute(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(3)
        }
    }
}
