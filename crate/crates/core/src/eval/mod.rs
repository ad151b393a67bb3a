//! Scoring, fold assignment, cross-validation and prediction files.

mod cv;
mod folds;
mod report;

pub use cv::{cross_validate, CvOutcome, Regime};
pub use folds::{make_folds, read_folds, CvPlan, Folds};
pub use report::{score, ClassScores, EvalReport, Predictions};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::annotation::{read_jsonl, GoldStore, RefClass};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct PredictionRow {
    instance_id: String,
    /// `null` or `"NONE"` when the model abstained.
    label: Option<String>,
}

/// JSONL `{instance_id, label}` sorted by id; abstentions have `label: null`.
pub fn write_predictions(predictions: &Predictions) -> String {
    let mut s = String::new();
    for (id, label) in predictions {
        let row = PredictionRow {
            instance_id: id.clone(),
            label: label.map(|l| l.as_str().to_string()),
        };
        let _ = writeln!(
            s,
            "{}",
            serde_json::to_string(&row).expect("prediction row serializes")
        );
    }
    s
}

pub fn read_predictions(text: &str) -> Result<Predictions> {
    let rows: Vec<PredictionRow> = read_jsonl(text, "predictions")?;
    let mut out = Predictions::new();
    for (i, r) in rows.into_iter().enumerate() {
        let label = match r.label.as_deref() {
            None | Some("NONE") => None,
            Some(s) => Some(s.parse::<RefClass>().map_err(|e| Error::Parse {
                context: "predictions".into(),
                line: i + 1,
                message: e.to_string(),
            })?),
        };
        if out.insert(r.instance_id.clone(), label).is_some() {
            return Err(Error::Invalid(format!(
                "duplicate prediction for {}",
                r.instance_id
            )));
        }
    }
    Ok(out)
}

pub fn gold_labels(gold: &GoldStore) -> BTreeMap<String, RefClass> {
    gold.entries()
        .map(|e| (e.instance_id.clone(), e.label))
        .collect()
}
