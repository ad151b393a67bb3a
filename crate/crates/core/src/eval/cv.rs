use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::Folds;
use super::report::{score, EvalReport, Predictions};
use crate::dataset::LabeledSet;
use crate::error::{Error, Result};
use crate::models::Trainer;

/// Training regime for cross-validation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Gold training folds only.
    #[default]
    T1,
    /// Gold training folds plus silver data.
    T2,
    /// Pretraining on silver, then fine-tuning on gold. Only the external
    /// encoder harness implements it; here it runs as T2.
    T3,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(Regime::T1),
            "T2" => Ok(Regime::T2),
            "T3" => Ok(Regime::T3),
            _ => Err(Error::Invalid(format!(
                "unknown regime {s:?}; expected T1, T2 or T3"
            ))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug)]
pub struct CvOutcome {
    pub report: EvalReport,
    /// Pooled held-out predictions.
    pub predictions: Predictions,
}

/// Trains on all but one fold, predicts the held-out fold, and scores the
/// pooled predictions once.
pub fn cross_validate(
    trainer: &dyn Trainer,
    gold: &LabeledSet,
    folds: &Folds,
    silver: Option<&LabeledSet>,
    regime: Regime,
) -> Result<CvOutcome> {
    let mut fold_of = Vec::with_capacity(gold.len());
    for item in &gold.items {
        match folds.fold_of(item.id()) {
            Some(f) => fold_of.push(f),
            None => {
                return Err(Error::Invalid(format!(
                    "instance {} has no fold",
                    item.id()
                )))
            }
        }
    }
    let silver = match regime {
        Regime::T1 => None,
        Regime::T2 | Regime::T3 => silver,
    };
    if let Some(s) = silver {
        let gold_ids = gold.ids();
        let overlap: Vec<&str> = s.ids().intersection(&gold_ids).copied().collect();
        if !overlap.is_empty() {
            return Err(Error::Leakage(format!(
                "{} silver instances are also gold instances (first: {})",
                overlap.len(),
                overlap[0]
            )));
        }
    }

    let per_fold: Vec<Vec<(String, Option<crate::RefClass>)>> = (0..folds.k)
        .into_par_iter()
        .map(|f| {
            let train_pos: Vec<usize> = (0..gold.len()).filter(|&i| fold_of[i] != f).collect();
            let mut train = gold.select(&train_pos);
            if let Some(s) = silver {
                for (item, label) in s.iter() {
                    train.push(item.clone(), label);
                }
            }
            let model = trainer.fit(&train)?;
            Ok(gold
                .items
                .par_iter()
                .zip(fold_of.par_iter())
                .filter(|(_, &g)| g == f)
                .map(|(item, _)| (item.id().to_string(), model.predict(item)))
                .collect())
        })
        .collect::<Result<_>>()?;

    let predictions: Predictions = per_fold.into_iter().flatten().collect();
    let gold_map: BTreeMap<String, crate::RefClass> = gold
        .iter()
        .map(|(item, l)| (item.id().to_string(), l))
        .collect();
    let mut report = score(&gold_map, &predictions)?;
    report.notes.push(format!(
        "{}-fold cross-validation, regime {regime}",
        folds.k
    ));
    if regime == Regime::T3 {
        report
            .notes
            .push("T3 has no separate pretraining step for this model and was run as T2".into());
    }
    Ok(CvOutcome {
        report,
        predictions,
    })
}
