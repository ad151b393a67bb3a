use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wirref_core::corpus::GroupBy;
use wirref_core::eval::{CvPlan, Regime};
use wirref_core::features::FeatureConfig;
use wirref_core::models::LinearHyper;
use wirref_core::weaksup::EmOptions;

use crate::run::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Parsed debates holding the gold-annotated instances.
    pub corpus: Option<PathBuf>,
    /// Parsed debates used for weak supervision; must not share documents
    /// with the gold corpus.
    pub unlabeled: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub resolutions: Option<PathBuf>,
    pub silver: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    #[default]
    LabelModel,
    Majority,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SilverConfig {
    pub aggregator: Aggregator,
    /// Most silver instances kept per class for training.
    pub cap: usize,
    pub seed: u64,
    pub review_per_class: usize,
    pub review_window: usize,
}

impl Default for SilverConfig {
    fn default() -> Self {
        SilverConfig {
            aggregator: Aggregator::LabelModel,
            cap: 300,
            seed: 42,
            review_per_class: 25,
            review_window: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub group_by: GroupBy,
    pub standardize: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            group_by: GroupBy::Speaker,
            standardize: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub features: FeatureConfig,
    pub linear: LinearHyper,
    pub label_model: EmOptions,
    pub cv: CvPlan,
    pub regime: Regime,
    pub silver: SilverConfig,
    pub analysis: AnalysisConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<PipelineConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let p = &mut cfg.paths;
        for slot in [
            &mut p.corpus,
            &mut p.unlabeled,
            &mut p.patterns,
            &mut p.gold,
            &mut p.annotations,
            &mut p.resolutions,
            &mut p.silver,
            &mut p.params,
            &mut p.output_dir,
        ] {
            if let Some(rel) = slot.as_ref().filter(|p| p.is_relative()) {
                *slot = Some(base.join(rel));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.features
            .validate()
            .map_err(|e| CliError::Usage(format!("config: {e}")))?;
        if self.cv.k < 2 {
            return Err(CliError::Usage("config: cv.k must be at least 2".into()));
        }
        if self.linear.lambda.is_nan() || self.linear.lambda <= 0.0 || self.linear.epochs == 0 {
            return Err(CliError::Usage(
                "config: linear.lambda must be positive and epochs nonzero".into(),
            ));
        }
        Ok(())
    }
}
