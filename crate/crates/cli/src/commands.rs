use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use wirref_core::analysis::{build_profiles, pca, render_biplot};
use wirref_core::annotation::{
    adjudicate, agreement_report, read_annotations, read_gold, read_resolutions, write_gold,
    GoldStore,
};
use wirref_core::corpus::{
    corpus_stats, extract_instances, ingest_str, split_pair, write_jsonl, Format, GroupBy,
    PairRecord, SegmentIndex,
};
use wirref_core::dataset::{all_items, resolve, LabeledSet};
use wirref_core::depmatch::{
    compile_set, default_patterns, match_all, PatternSet, DEFAULT_PATTERNS,
};
use wirref_core::eval::{
    cross_validate, gold_labels, make_folds, read_folds, read_predictions, score,
    write_predictions, Folds, Predictions, Regime,
};
use wirref_core::features::{read_vocabulary, FeatureConfig};
use wirref_core::models::{
    fit_majority, Classifier, LinearClassifier, LinearModel, LinearTrainer, MajorityModel,
    MajorityTrainer, RuleModel, RuleTrainer, Trainer,
};
use wirref_core::weaksup::{
    build_matrix, downsample, fit_label_model, majority_vote, predict_silver, read_matrix,
    read_silver, sample_for_review, write_silver, LabelModelParams,
};
use wirref_core::{Error, RefClass, Segment};

use crate::config::{Aggregator, PipelineConfig};
use crate::run::{sha256_hex, CliError, CliResult, FileRecord, Stage};

/// Input paths; each overrides the matching entry of the config file.
#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct Inputs {
    /// Parsed corpus with the gold-annotated instances (.conllu, .xml, .jsonl).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Parsed corpus for weak supervision.
    #[arg(long)]
    pub unlabeled: Option<PathBuf>,
    /// Pattern file; the bundled inventory is used when absent.
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    /// Gold labels JSONL.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Annotation JSONL with one line per annotator decision.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Resolution JSONL for disagreements.
    #[arg(long)]
    pub resolutions: Option<PathBuf>,
    /// Silver labels JSONL.
    #[arg(long)]
    pub silver: Option<PathBuf>,
    /// Label-model parameters JSON.
    #[arg(long)]
    pub params: Option<PathBuf>,
}

impl Inputs {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        let p = &mut cfg.paths;
        for (flag, slot) in [
            (&self.corpus, &mut p.corpus),
            (&self.unlabeled, &mut p.unlabeled),
            (&self.patterns, &mut p.patterns),
            (&self.gold, &mut p.gold),
            (&self.annotations, &mut p.annotations),
            (&self.resolutions, &mut p.resolutions),
            (&self.silver, &mut p.silver),
            (&self.params, &mut p.params),
        ] {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Majority,
    Rule,
    Linear,
}

fn require<'a>(path: &'a Option<PathBuf>, what: &str) -> CliResult<&'a Path> {
    path.as_deref().ok_or_else(|| {
        CliError::Usage(format!(
            "missing {what}: pass --{what} or set paths.{what} in the config"
        ))
    })
}

/// Checks that every named path exists before a stage does any work.
pub fn check_paths(paths: &[(&str, &Option<PathBuf>)]) -> CliResult<()> {
    for (what, p) in paths {
        if let Some(p) = p {
            if !p.exists() {
                return Err(CliError::Data(Error::Invalid(format!(
                    "{what} file {} does not exist",
                    p.display()
                ))));
            }
        }
    }
    Ok(())
}

fn json_line(value: &impl Serialize) -> String {
    serde_json::to_string(value).expect("record serializes") + "\n"
}

fn jsonl<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    rows.into_iter().map(|r| json_line(&r)).collect()
}

fn pretty(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("value serializes") + "\n"
}

fn load_corpus(stage: &mut Stage, role: &str, path: &Path) -> CliResult<Vec<Segment>> {
    let format = Format::from_path(path).ok_or_else(|| {
        CliError::Usage(format!(
            "cannot tell the format of {} from its extension",
            path.display()
        ))
    })?;
    let text = stage.read(role, path)?;
    let ingested = ingest_str(&text, format)?;
    stage.warn(ingested.warnings);
    if !ingested.rejected.is_empty() {
        stage.note(&format!("{role}_rejected"), ingested.rejected.len());
    }
    Ok(ingested.segments)
}

fn load_patterns(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<(PatternSet, String)> {
    match &cfg.paths.patterns {
        Some(p) => {
            let text = stage.read("patterns", p)?;
            Ok((compile_set(&text)?, text))
        }
        None => {
            stage.inputs.push(FileRecord {
                role: "patterns".into(),
                file: "<bundled>".into(),
                sha256: sha256_hex(DEFAULT_PATTERNS.as_bytes()),
            });
            Ok((default_patterns(), DEFAULT_PATTERNS.to_string()))
        }
    }
}

fn load_gold(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<GoldStore> {
    let text = stage.read("gold", require(&cfg.paths.gold, "gold")?)?;
    Ok(read_gold(&text)?)
}

fn load_params(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<LabelModelParams> {
    let text = stage.read("params", require(&cfg.paths.params, "params")?)?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Data(Error::Parse {
            context: "label-model parameters".into(),
            line: e.line(),
            message: e.to_string(),
        })
    })
}

fn gold_set(
    stage: &mut Stage,
    cfg: &PipelineConfig,
) -> CliResult<(SegmentIndex, GoldStore, LabeledSet)> {
    let segments = load_corpus(stage, "corpus", require(&cfg.paths.corpus, "corpus")?)?;
    let gold = load_gold(stage, cfg)?;
    let index = SegmentIndex::new(segments);
    let set = LabeledSet::from_gold(&index, &gold)?;
    stage.note("gold_instances", set.len());
    Ok((index, gold, set))
}

/// Silver labels capped per class and resolved against the unlabeled corpus.
fn silver_set(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<Option<LabeledSet>> {
    let Some(path) = cfg.paths.silver.as_deref() else {
        return Ok(None);
    };
    let labels = read_silver(&stage.read("silver", path)?)?;
    let kept = downsample(&labels, cfg.silver.cap, cfg.silver.seed);
    let segments = load_corpus(
        stage,
        "unlabeled",
        require(&cfg.paths.unlabeled, "unlabeled")?,
    )?;
    let index = SegmentIndex::new(segments);
    let mut set = LabeledSet::default();
    for l in &kept {
        set.push(resolve(&index, &l.instance_id)?, l.hard_label);
    }
    stage.note("silver_available", labels.len());
    stage.note("silver_used", set.len());
    Ok(Some(set))
}

pub fn ingest(stage: &mut Stage, input: &Path, format: Option<&str>) -> CliResult<()> {
    let format = match format {
        Some(f) => f.parse::<Format>()?,
        None => Format::from_path(input).ok_or_else(|| {
            CliError::Usage(format!(
                "cannot tell the format of {}; pass --format",
                input.display()
            ))
        })?,
    };
    let text = stage.read("input", input)?;
    let ingested = ingest_str(&text, format)?;
    let mut out = Vec::new();
    write_jsonl(&ingested.segments, &mut out).map_err(|e| CliError::Internal(e.to_string()))?;
    stage.write("segments.jsonl", out);
    stage.write("rejected.jsonl", jsonl(&ingested.rejected));
    stage.note("segments", ingested.segments.len());
    stage.note("rejected", ingested.rejected.len());
    stage.warn(ingested.warnings);
    stage.message = format!(
        "{} segments ingested, {} rejected",
        ingested.segments.len(),
        ingested.rejected.len()
    );
    Ok(())
}

pub fn extract(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<()> {
    let segments = load_corpus(stage, "corpus", require(&cfg.paths.corpus, "corpus")?)?;
    let instances = extract_instances(&segments);
    let mut per_form: BTreeMap<String, usize> = BTreeMap::new();
    for i in &instances {
        *per_form.entry(i.form.clone()).or_default() += 1;
    }
    stage.write("instances.jsonl", jsonl(&instances));
    stage.note("instances", instances.len());
    stage.note("per_form", &per_form);
    let mut msg = format!(
        "{} instances in {} segments\n",
        instances.len(),
        segments.len()
    );
    for (form, n) in &per_form {
        msg += &format!("{form}\t{n}\n");
    }
    stage.message = msg;
    Ok(())
}

pub fn stats(stage: &mut Stage, cfg: &PipelineConfig, group_by: GroupBy) -> CliResult<()> {
    let segments = load_corpus(stage, "corpus", require(&cfg.paths.corpus, "corpus")?)?;
    let instances = extract_instances(&segments);
    let s = corpus_stats(&segments, &instances, group_by)?;
    let tsv = s.to_tsv();
    stage.write("stats.tsv", tsv.clone());
    stage.note("tokens", s.total.tokens);
    stage.note("instances", s.total.instances);
    stage.message = tsv;
    Ok(())
}

pub fn agreement(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<()> {
    let records = read_annotations(&stage.read(
        "annotations",
        require(&cfg.paths.annotations, "annotations")?,
    )?)?;
    let annotators: BTreeSet<&str> = records.iter().map(|r| r.annotator.as_str()).collect();
    let annotators: Vec<&str> = annotators.into_iter().collect();
    if annotators.len() < 2 {
        return Err(CliError::Data(Error::InsufficientData(
            "agreement needs labels from at least two annotators".into(),
        )));
    }
    let (a, b) = (annotators[0], annotators[1]);
    if annotators.len() > 2 {
        let w = format!("more than two annotators; pairwise scores use {a} and {b}");
        log::warn!("{w}");
        stage.warn([w]);
    }
    let resolutions = match &cfg.paths.resolutions {
        Some(p) => Some(read_resolutions(&stage.read("resolutions", p)?)?),
        None => None,
    };
    let by = |name: &str| {
        records
            .iter()
            .filter(|r| r.annotator == name)
            .cloned()
            .collect::<Vec<_>>()
    };
    let gold = match adjudicate(
        &by(a),
        &by(b),
        resolutions.as_ref().unwrap_or(&BTreeMap::new()),
    ) {
        Ok(g) => Some(g),
        Err(Error::MissingResolution(ids)) if resolutions.is_none() => {
            stage.note("unresolved", ids.len());
            let w = format!(
                "{} instances need a resolution before gold labels can be written",
                ids.len()
            );
            log::warn!("{w}");
            stage.warn([w]);
            None
        }
        Err(e) => return Err(e.into()),
    };
    let report = agreement_report(&records, a, b, gold.as_ref())?;
    let text = report.render();
    stage.write("agreement.txt", text.clone());
    stage.write("agreement.json", pretty(&report));
    if let Some(g) = &gold {
        let mut out = Vec::new();
        write_gold(g, &mut out).map_err(|e| CliError::Internal(e.to_string()))?;
        stage.write("gold.jsonl", out);
        stage.note("gold_instances", g.len());
    }
    stage.note("alpha", report.alpha);
    stage.message = text;
    Ok(())
}

fn test_docs(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<BTreeSet<String>> {
    let mut docs = BTreeSet::new();
    if cfg.paths.gold.is_some() {
        for e in load_gold(stage, cfg)?.entries() {
            if let Some((doc, _, _)) = wirref_core::corpus::parse_instance_id(&e.instance_id) {
                docs.insert(doc.to_string());
            }
        }
    }
    Ok(docs)
}

pub fn lf_apply(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<()> {
    let (patterns, _) = load_patterns(stage, cfg)?;
    let segments = load_corpus(
        stage,
        "unlabeled",
        require(&cfg.paths.unlabeled, "unlabeled")?,
    )?;
    let docs = test_docs(stage, cfg)?;
    let matrix = build_matrix(&patterns, &segments, &docs)?;
    let hits = match_all(&patterns, &segments);
    stage.write("matrix.tsv", matrix.to_tsv());
    stage.write("hits.tsv", hits.to_tsv());
    stage.note("rows", matrix.num_rows());
    stage.note("excluded", matrix.excluded);
    stage.note("conflicts", matrix.conflicts());
    stage.message = format!(
        "{} instances with at least one vote, {} without, {} with conflicting votes\n{}",
        matrix.num_rows(),
        matrix.excluded,
        matrix.conflicts(),
        hits.to_tsv()
    );
    Ok(())
}

pub fn label_model(stage: &mut Stage, cfg: &PipelineConfig, matrix: &Path) -> CliResult<()> {
    let m = read_matrix(&stage.read("matrix", matrix)?)?;
    let params = fit_label_model(&m, cfg.label_model)?;
    stage.warn(params.warnings.clone());
    stage.write("params.json", pretty(&params));
    stage.note("iterations", params.iterations);
    stage.note("converged", params.converged);
    let mut msg = format!(
        "EM: {} iterations, converged = {}, final log-likelihood {:.6}\nfunction\taccuracy\tpropensity\n",
        params.iterations,
        params.converged,
        params.log_likelihood_trace.last().copied().unwrap_or(f64::NAN)
    );
    for j in 0..params.lfs.len() {
        msg += &format!(
            "{}\t{:.4}\t{:.4}\n",
            params.lfs[j], params.accuracy[j], params.propensity[j]
        );
    }
    stage.message = msg;
    Ok(())
}

pub fn silver(stage: &mut Stage, cfg: &PipelineConfig, matrix: &Path) -> CliResult<()> {
    let m = read_matrix(&stage.read("matrix", matrix)?)?;
    let labels = match cfg.silver.aggregator {
        Aggregator::Majority => majority_vote(&m),
        Aggregator::LabelModel => predict_silver(&m, &load_params(stage, cfg)?)?,
    };
    let mut out = Vec::new();
    write_silver(&labels, &mut out).map_err(|e| CliError::Internal(e.to_string()))?;
    stage.write("silver.jsonl", out);
    let mut per_class = BTreeMap::new();
    for l in &labels {
        *per_class.entry(l.hard_label.as_str()).or_insert(0usize) += 1;
    }
    stage.note("silver", labels.len());
    stage.note("per_class", &per_class);
    stage.message = format!("{} silver labels\n", labels.len())
        + &per_class
            .iter()
            .map(|(c, n)| format!("{c}\t{n}\n"))
            .collect::<String>();
    Ok(())
}

pub fn sample_review(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<()> {
    let labels = read_silver(&stage.read("silver", require(&cfg.paths.silver, "silver")?)?)?;
    let segments = load_corpus(
        stage,
        "unlabeled",
        require(&cfg.paths.unlabeled, "unlabeled")?,
    )?;
    let index = SegmentIndex::new(segments);
    let sheet = sample_for_review(
        &labels,
        &index,
        cfg.silver.review_per_class,
        cfg.silver.seed,
        cfg.silver.review_window,
    )?;
    stage.write("review.tsv", sheet.to_tsv());
    stage.note("rows", sheet.rows.len());
    stage.message = format!("{} rows sampled for review", sheet.rows.len());
    Ok(())
}

pub fn export_pairs(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<()> {
    let pair = |item: &wirref_core::dataset::Item, label: Option<RefClass>| {
        let (s1, s2) = split_pair(&item.segment, item.instance.flat_token_index);
        PairRecord {
            instance_id: item.id().to_string(),
            s1,
            s2,
            label,
        }
    };
    if cfg.paths.gold.is_some() {
        let (_, gold, set) = gold_set(stage, cfg)?;
        stage.write(
            "pairs.jsonl",
            jsonl(set.iter().map(|(i, l)| pair(i, Some(l)))),
        );
        let folds = make_folds(&gold_labels(&gold), &cfg.cv)?;
        stage.warn(folds.warnings.clone());
        stage.write("folds.jsonl", folds.to_jsonl());
        stage.note("pairs", set.len());
    } else {
        let segments = load_corpus(stage, "corpus", require(&cfg.paths.corpus, "corpus")?)?;
        let items = all_items(&SegmentIndex::new(segments));
        stage.write("pairs.jsonl", jsonl(items.iter().map(|i| pair(i, None))));
        stage.note("pairs", items.len());
    }
    if let Some(silver) = silver_set(stage, cfg)? {
        stage.write(
            "silver_pairs.jsonl",
            jsonl(silver.iter().map(|(i, l)| pair(i, Some(l)))),
        );
    }
    stage.message = format!("pairs exported: {}", stage.summary["pairs"]);
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    features: Option<FeatureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_docs: Option<usize>,
}

fn rule_trainer(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<(RuleTrainer, String)> {
    let (patterns, source) = load_patterns(stage, cfg)?;
    let params = load_params(stage, cfg)?;
    Ok((RuleTrainer::new(patterns, params)?, source))
}

fn linear_trainer(cfg: &PipelineConfig) -> LinearTrainer {
    LinearTrainer {
        features: cfg.features.clone(),
        hyper: cfg.linear,
    }
}

/// Gold plus, for T2 and T3, the capped silver set.
fn training_set(
    stage: &mut Stage,
    cfg: &PipelineConfig,
    gold: &LabeledSet,
) -> CliResult<LabeledSet> {
    let mut train = gold.clone();
    if cfg.regime != Regime::T1 {
        if let Some(s) = silver_set(stage, cfg)? {
            let gold_ids = gold.ids();
            if s.iter().any(|(i, _)| gold_ids.contains(i.id())) {
                return Err(CliError::Data(Error::Leakage(
                    "silver instances overlap the gold set".into(),
                )));
            }
            for (item, label) in s.iter() {
                train.push(item.clone(), label);
            }
        }
    }
    Ok(train)
}

pub fn train(stage: &mut Stage, cfg: &PipelineConfig, model: ModelKind) -> CliResult<()> {
    let (_, _, gold) = gold_set(stage, cfg)?;
    match model {
        ModelKind::Majority => {
            let train = training_set(stage, cfg, &gold)?;
            let m = fit_majority(&train.items, &train.labels)?;
            stage.write(
                "model.json",
                pretty(&ModelHeader {
                    kind: model,
                    features: None,
                    n_docs: None,
                }),
            );
            stage.write("majority.json", pretty(&m));
            stage.write("majority.tsv", m.report());
            stage.message = m.report();
        }
        ModelKind::Rule => {
            let (t, source) = rule_trainer(stage, cfg)?;
            stage.write(
                "model.json",
                pretty(&ModelHeader {
                    kind: model,
                    features: None,
                    n_docs: None,
                }),
            );
            stage.write("patterns.yaml", source);
            stage.write("params.json", pretty(&t.model.params));
            stage.message = format!("rule model with {} patterns", t.model.patterns.len());
        }
        ModelKind::Linear => {
            let train = training_set(stage, cfg, &gold)?;
            let clf = linear_trainer(cfg).fit_linear(&train)?;
            stage.warn(clf.vocab.warnings.clone());
            let header = ModelHeader {
                kind: model,
                features: Some(clf.vocab.config.clone()),
                n_docs: Some(clf.vocab.n_docs),
            };
            let names: Vec<String> = (0..clf.model.dim)
                .map(|i| {
                    clf.vocab.entries.get(i).map_or_else(
                        || format!("wordform:{}", i - clf.vocab.len()),
                        |e| e.term.clone(),
                    )
                })
                .collect();
            stage.write("model.json", pretty(&header));
            stage.write("vocab.tsv", clf.vocab.to_tsv());
            stage.write("linear.json", clf.model.metadata_json() + "\n");
            stage.write("weights.tsv", clf.model.weights_tsv(&names));
            stage.note("training_instances", train.len());
            stage.note("final_loss", clf.model.loss_trace.last());
            stage.message = format!(
                "linear model over {} features, {} classes, trained on {} instances",
                clf.model.dim,
                clf.model.classes.len(),
                train.len()
            );
        }
    }
    stage.note("regime", cfg.regime);
    Ok(())
}

fn load_model(stage: &mut Stage, dir: &Path) -> CliResult<Box<dyn Classifier>> {
    let header: ModelHeader = serde_json::from_str(&stage.read("model", &dir.join("model.json"))?)
        .map_err(|e| CliError::Data(Error::Invalid(format!("model.json: {e}"))))?;
    let bad =
        |what: &str, e: serde_json::Error| CliError::Data(Error::Invalid(format!("{what}: {e}")));
    Ok(match header.kind {
        ModelKind::Majority => {
            let m: MajorityModel =
                serde_json::from_str(&stage.read("model", &dir.join("majority.json"))?)
                    .map_err(|e| bad("majority.json", e))?;
            Box::new(m)
        }
        ModelKind::Rule => {
            let patterns = compile_set(&stage.read("model", &dir.join("patterns.yaml"))?)?;
            let params: LabelModelParams =
                serde_json::from_str(&stage.read("model", &dir.join("params.json"))?)
                    .map_err(|e| bad("params.json", e))?;
            Box::new(RuleModel::new(patterns, params)?)
        }
        ModelKind::Linear => {
            let (Some(features), Some(n_docs)) = (header.features, header.n_docs) else {
                return Err(CliError::Data(Error::Invalid(
                    "linear model header lacks feature settings".into(),
                )));
            };
            let vocab = read_vocabulary(
                &stage.read("model", &dir.join("vocab.tsv"))?,
                n_docs,
                features,
            )?;
            let model = LinearModel::from_files(
                &stage.read("model", &dir.join("linear.json"))?,
                &stage.read("model", &dir.join("weights.tsv"))?,
            )?;
            if model.dim != vocab.dim() {
                return Err(CliError::Data(Error::DimensionMismatch {
                    expected: vocab.dim(),
                    actual: model.dim,
                }));
            }
            Box::new(LinearClassifier { vocab, model })
        }
    })
}

pub fn predict(stage: &mut Stage, cfg: &PipelineConfig, model_dir: &Path) -> CliResult<()> {
    let model = load_model(stage, model_dir)?;
    let segments = load_corpus(stage, "corpus", require(&cfg.paths.corpus, "corpus")?)?;
    let items = all_items(&SegmentIndex::new(segments));
    let predictions: Predictions = items
        .iter()
        .map(|i| (i.id().to_string(), model.predict(i)))
        .collect();
    let abstained = predictions.values().filter(|p| p.is_none()).count();
    stage.write("predictions.jsonl", write_predictions(&predictions));
    stage.note("instances", predictions.len());
    stage.note("abstained", abstained);
    stage.message = format!(
        "{} predictions, {} abstentions",
        predictions.len(),
        abstained
    );
    Ok(())
}

#[derive(Serialize)]
struct AuditEntry {
    held_out_fold: Option<usize>,
    gold_in_training: usize,
    other_in_training: usize,
    held_out_in_training: usize,
}

/// Records which gold instances every fit sees and checks that one whole
/// fold is always missing.
struct AuditingTrainer<'a> {
    inner: &'a dyn Trainer,
    folds: &'a Folds,
    log: Mutex<Vec<AuditEntry>>,
}

impl Trainer for AuditingTrainer<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn fit(&self, train: &LabeledSet) -> wirref_core::Result<Box<dyn Classifier>> {
        let mut per_fold = vec![0usize; self.folds.k];
        let mut other = 0;
        for item in &train.items {
            match self.folds.fold_of(item.id()) {
                Some(f) => per_fold[f] += 1,
                None => other += 1,
            }
        }
        let empty: Vec<usize> = (0..self.folds.k).filter(|&f| per_fold[f] == 0).collect();
        let held_out = (empty.len() == 1).then(|| empty[0]);
        self.log.lock().expect("audit log lock").push(AuditEntry {
            held_out_fold: held_out,
            gold_in_training: per_fold.iter().sum(),
            other_in_training: other,
            held_out_in_training: held_out.map_or(usize::MAX, |f| per_fold[f]),
        });
        self.inner.fit(train)
    }
}

pub fn cv(
    stage: &mut Stage,
    cfg: &PipelineConfig,
    model: ModelKind,
    folds_path: Option<&Path>,
    audit: bool,
) -> CliResult<()> {
    let (_, gold_store, gold) = gold_set(stage, cfg)?;
    let folds = match folds_path {
        Some(p) => read_folds(&stage.read("folds", p)?)?,
        None => make_folds(&gold_labels(&gold_store), &cfg.cv)?,
    };
    stage.warn(folds.warnings.clone());
    let silver = if cfg.regime == Regime::T1 {
        None
    } else {
        silver_set(stage, cfg)?
    };
    let rule;
    let linear;
    let trainer: &dyn Trainer = match model {
        ModelKind::Majority => &MajorityTrainer,
        ModelKind::Rule => {
            rule = rule_trainer(stage, cfg)?.0;
            &rule
        }
        ModelKind::Linear => {
            linear = linear_trainer(cfg);
            &linear
        }
    };
    let auditor = AuditingTrainer {
        inner: trainer,
        folds: &folds,
        log: Mutex::new(Vec::new()),
    };
    let used: &dyn Trainer = if audit { &auditor } else { trainer };
    let outcome = cross_validate(used, &gold, &folds, silver.as_ref(), cfg.regime)?;
    if audit {
        let mut log = auditor.log.into_inner().expect("audit log lock");
        log.sort_by_key(|e| e.held_out_fold);
        if log.len() != folds.k
            || log
                .iter()
                .any(|e| e.held_out_fold.is_none() || e.held_out_in_training != 0)
        {
            return Err(CliError::Internal(
                "fold audit failed: a training set saw held-out gold labels".into(),
            ));
        }
        stage.write("audit.json", pretty(&log));
    }
    let report = &outcome.report;
    stage.write("folds.jsonl", folds.to_jsonl());
    stage.write("predictions.jsonl", write_predictions(&outcome.predictions));
    stage.write("report.json", report.to_json() + "\n");
    stage.write("report.txt", report.render());
    stage.note("model", model);
    stage.note("regime", cfg.regime);
    stage.note("accuracy", report.accuracy);
    stage.message = report.render();
    Ok(())
}

pub fn score_cmd(stage: &mut Stage, cfg: &PipelineConfig, pred: &Path) -> CliResult<()> {
    let gold = load_gold(stage, cfg)?;
    let predictions = read_predictions(&stage.read("predictions", pred)?)?;
    let report = score(&gold_labels(&gold), &predictions)?;
    stage.write("report.json", report.to_json() + "\n");
    stage.write("report.txt", report.render());
    stage.note("accuracy", report.accuracy);
    stage.message = report.render();
    Ok(())
}

pub fn analyze(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<()> {
    let segments = load_corpus(stage, "corpus", require(&cfg.paths.corpus, "corpus")?)?;
    let gold = load_gold(stage, cfg)?;
    let index = SegmentIndex::new(segments);
    let profiles = build_profiles(
        gold.entries().map(|e| (e.instance_id.as_str(), e.label)),
        &index,
        cfg.analysis.group_by,
    )?;
    stage.warn(profiles.warnings.clone());
    let columns: Vec<String> = RefClass::ALL.iter().map(|c| c.to_string()).collect();
    let result = pca(&profiles.rate_rows(), &columns, cfg.analysis.standardize)?;
    stage.warn(result.warnings.clone());
    stage.write("profiles.csv", profiles.to_csv());
    stage.write("profiles.txt", profiles.render());
    stage.write("loadings.csv", result.loadings_csv());
    stage.write("scores.csv", result.scores_csv(&profiles.groups));
    stage.write("eigenvalues.csv", result.eigenvalues_csv());
    stage.write("biplot.svg", render_biplot(&result, &profiles.groups)?);
    stage.note("groups", profiles.len());
    stage.note("explained_variance_ratio", &result.explained_variance_ratio);
    stage.message = profiles.render();
    Ok(())
}
