//! Baseline classifiers: per-form majority, pattern rules, and a linear
//! model over context n-grams.

mod linear;
mod majority;
mod rule;

pub use linear::{fit_linear, LinearClassifier, LinearHyper, LinearModel, MODEL_FORMAT_VERSION};
pub use majority::{fit_majority, FormStats, MajorityModel};
pub use rule::RuleModel;

use crate::annotation::RefClass;
use crate::dataset::{Item, LabeledSet};
use crate::depmatch::PatternSet;
use crate::error::Result;
use crate::features::{fit_vocabulary, transform_all, FeatureConfig};
use crate::weaksup::LabelModelParams;

/// A fitted model. `None` means the model abstains on this instance.
pub trait Classifier: Send + Sync {
    fn predict(&self, item: &Item) -> Option<RefClass>;
}

/// Fits a classifier on one training fold.
pub trait Trainer: Sync {
    fn name(&self) -> &str;
    fn fit(&self, train: &LabeledSet) -> Result<Box<dyn Classifier>>;
}

pub struct MajorityTrainer;

impl Trainer for MajorityTrainer {
    fn name(&self) -> &str {
        "majority"
    }

    fn fit(&self, train: &LabeledSet) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(fit_majority(&train.items, &train.labels)?))
    }
}

/// Returns the same rule model for every fold; the training labels are unused.
pub struct RuleTrainer {
    pub model: RuleModel,
}

impl Trainer for RuleTrainer {
    fn name(&self) -> &str {
        "rule"
    }

    fn fit(&self, _train: &LabeledSet) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(self.model.clone()))
    }
}

impl RuleTrainer {
    pub fn new(patterns: PatternSet, params: LabelModelParams) -> Result<Self> {
        Ok(RuleTrainer {
            model: RuleModel::new(patterns, params)?,
        })
    }
}

pub struct LinearTrainer {
    pub features: FeatureConfig,
    pub hyper: LinearHyper,
}

impl Trainer for LinearTrainer {
    fn name(&self) -> &str {
        "linear"
    }

    fn fit(&self, train: &LabeledSet) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(self.fit_linear(train)?))
    }
}

impl LinearTrainer {
    pub fn fit_linear(&self, train: &LabeledSet) -> Result<LinearClassifier> {
        let vocab = fit_vocabulary(&train.items, &train.labels, &self.features)?;
        let xs = transform_all(&train.items, &vocab);
        let model = fit_linear(&xs, &train.labels, self.hyper)?;
        Ok(LinearClassifier { vocab, model })
    }
}
