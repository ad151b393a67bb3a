use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::annotation::{ConfusionMatrix, RefClass};
use crate::error::{Error, Result};

/// Per-instance predictions; `None` means the model abstained.
pub type Predictions = BTreeMap<String, Option<RefClass>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub class: RefClass,
    /// Gold instances of this class.
    pub support: usize,
    /// Instances predicted as this class.
    pub predicted: usize,
    pub true_positives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Instances without a prediction.
    pub abstained: usize,
    pub per_class: Vec<ClassScores>,
    /// Rows are gold labels, columns predictions; abstentions are not in it.
    pub confusion: ConfusionMatrix,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores predictions against gold labels. Every gold instance must have
/// an entry; abstentions count as wrong.
pub fn score(gold: &BTreeMap<String, RefClass>, predictions: &Predictions) -> Result<EvalReport> {
    if let Some(id) = predictions.keys().find(|id| !gold.contains_key(*id)) {
        return Err(Error::UnknownInstance(id.clone()));
    }
    let missing: Vec<String> = gold
        .keys()
        .filter(|id| !predictions.contains_key(*id))
        .cloned()
        .collect();
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(5).map(String::as_str).collect();
        return Err(Error::Invalid(format!(
            "{} gold instances have no prediction entry (first: {})",
            missing.len(),
            shown.join(", ")
        )));
    }
    let mut confusion = ConfusionMatrix::default();
    let mut abstained = 0;
    for (id, g) in gold {
        match predictions[id] {
            Some(p) => confusion.add(*g, p),
            None => abstained += 1,
        }
    }
    let per_class = RefClass::ALL
        .iter()
        .map(|&c| {
            let tp = confusion.get(c, c);
            let support = gold.values().filter(|&&g| g == c).count();
            let predicted = confusion.col_sum(c);
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassScores {
                class: c,
                support,
                predicted,
                true_positives: tp,
                precision,
                recall,
                f1,
            }
        })
        .collect::<Vec<_>>();
    let correct = per_class.iter().map(|s| s.true_positives).sum();
    Ok(EvalReport {
        n: gold.len(),
        correct,
        accuracy: ratio(correct, gold.len()),
        abstained,
        per_class,
        confusion,
        notes: Vec::new(),
    })
}

fn pct(x: f64) -> String {
    format!("{:.0}", 100.0 * x)
}

impl EvalReport {
    pub fn class(&self, c: RefClass) -> &ClassScores {
        &self.per_class[c.index()]
    }

    /// Micro-averaged recall over all classes.
    pub fn micro_recall(&self) -> f64 {
        ratio(self.correct, self.per_class.iter().map(|s| s.support).sum())
    }

    /// Per-class gold counts, predictions, true positives and P/R/F1 in
    /// percent, then a total row with overall accuracy.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<10} {:>7} {:>7} {:>7} {:>6} {:>6} {:>6}",
            "Class", "#Gold", "#Hits", "TP", "Prec", "Rec", "F1"
        );
        for c in &self.per_class {
            let _ = writeln!(
                s,
                "{:<10} {:>7} {:>7} {:>7} {:>6} {:>6} {:>6}",
                c.class.as_str(),
                c.support,
                c.predicted,
                c.true_positives,
                pct(c.precision),
                pct(c.recall),
                pct(c.f1)
            );
        }
        let hits: usize = self.per_class.iter().map(|c| c.predicted).sum();
        let _ = writeln!(
            s,
            "{:<10} {:>7} {:>7} {:>7}   Acc = {:.1}%",
            "Total",
            self.n,
            hits,
            self.correct,
            100.0 * self.accuracy
        );
        for note in &self.notes {
            let _ = writeln!(s, "note: {note}");
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
