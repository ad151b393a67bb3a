use std::collections::BTreeMap;

use serde::Serialize;

use super::{AnnotationRecord, ConfusionMatrix, GoldStore, RefClass, NUM_CLASSES};
use crate::error::{Error, Result};

/// Components of a nominal Krippendorff's alpha computation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaDetails {
    pub alpha: f64,
    pub observed_disagreement: f64,
    pub expected_disagreement: f64,
    /// Number of pairable values (values in units with ≥2 annotations).
    pub pairable_values: usize,
    /// True when only one value occurs, so that expected disagreement is 0
    /// and alpha is set to 1.
    pub degenerate: bool,
}

/// Nominal alpha from the coincidence matrix. Each unit is the list of
/// values assigned to one item; units with fewer than two values are not
/// pairable and are skipped.
pub fn alpha_nominal<L: Ord + Clone>(units: &[Vec<L>]) -> Result<AlphaDetails> {
    let mut values: BTreeMap<L, usize> = BTreeMap::new();
    for unit in units.iter().filter(|u| u.len() >= 2) {
        for v in unit {
            let next = values.len();
            values.entry(v.clone()).or_insert(next);
        }
    }
    let k = values.len();
    let mut coincidence = vec![vec![0.0f64; k]; k];
    for unit in units.iter().filter(|u| u.len() >= 2) {
        let m = unit.len() as f64;
        let counts = unit.iter().fold(vec![0usize; k], |mut acc, v| {
            acc[values[v]] += 1;
            acc
        });
        for c in 0..k {
            for d in 0..k {
                let pairs = if c == d {
                    counts[c] * counts[c].saturating_sub(1)
                } else {
                    counts[c] * counts[d]
                };
                coincidence[c][d] += pairs as f64 / (m - 1.0);
            }
        }
    }
    let marginals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();
    if n < 2.0 {
        return Err(Error::InsufficientData(
            "no unit carries two or more annotations".into(),
        ));
    }
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            if c != d {
                observed += coincidence[c][d];
                expected += marginals[c] * marginals[d];
            }
        }
    }
    let observed = observed / n;
    let expected = expected / (n * (n - 1.0));
    let pairable_values = n.round() as usize;
    if expected == 0.0 {
        log::warn!("a single value occurs in all pairable units; alpha defined as 1.0");
        return Ok(AlphaDetails {
            alpha: 1.0,
            observed_disagreement: observed,
            expected_disagreement: expected,
            pairable_values,
            degenerate: true,
        });
    }
    Ok(AlphaDetails {
        alpha: 1.0 - observed / expected,
        observed_disagreement: observed,
        expected_disagreement: expected,
        pairable_values,
        degenerate: false,
    })
}

fn units(records: &[AnnotationRecord]) -> BTreeMap<&str, Vec<RefClass>> {
    let mut out: BTreeMap<&str, Vec<RefClass>> = BTreeMap::new();
    for r in records {
        out.entry(&r.instance_id).or_default().push(r.label);
    }
    out
}

/// Krippendorff's alpha (nominal) over any number of annotators.
pub fn krippendorff_alpha(records: &[AnnotationRecord]) -> Result<f64> {
    let units: Vec<Vec<RefClass>> = units(records).into_values().collect();
    Ok(alpha_nominal(&units)?.alpha)
}

/// Share of multiply-annotated instances on which all labels agree.
pub fn percent_agreement(records: &[AnnotationRecord]) -> Result<f64> {
    let units = units(records);
    let pairable: Vec<&Vec<RefClass>> = units.values().filter(|u| u.len() >= 2).collect();
    if pairable.is_empty() {
        return Err(Error::InsufficientData(
            "no doubly annotated instances".into(),
        ));
    }
    let agreeing = pairable
        .iter()
        .filter(|u| u.iter().all(|l| *l == u[0]))
        .count();
    Ok(agreeing as f64 / pairable.len() as f64)
}

/// Label pairs `(label_a, label_b)` on instances both annotators labeled.
fn shared(records: &[AnnotationRecord], a: &str, b: &str) -> Vec<(RefClass, RefClass)> {
    let mut by_a = BTreeMap::new();
    let mut by_b = BTreeMap::new();
    for r in records {
        if r.annotator == a {
            by_a.insert(r.instance_id.as_str(), r.label);
        } else if r.annotator == b {
            by_b.insert(r.instance_id.as_str(), r.label);
        }
    }
    by_a.iter()
        .filter_map(|(id, la)| by_b.get(id).map(|lb| (*la, *lb)))
        .collect()
}

/// Instances labeled class_j by `a` and class_i by `b`, at cell `(i, j)`.
pub fn confusion(records: &[AnnotationRecord], a: &str, b: &str) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for (la, lb) in shared(records, a, b) {
        m.add(lb, la);
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassF1 {
    pub f1: f64,
    /// Instances the reference annotator put in this class.
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairwiseF1 {
    pub per_class: BTreeMap<RefClass, ClassF1>,
    pub micro_f1: f64,
}

/// Per-class F1 between two annotators with `annotator_a` as reference.
pub fn pairwise_f1(
    records: &[AnnotationRecord],
    annotator_a: &str,
    annotator_b: &str,
) -> PairwiseF1 {
    let pairs = shared(records, annotator_a, annotator_b);
    let mut tp = [0usize; NUM_CLASSES];
    let mut fp = [0usize; NUM_CLASSES];
    let mut fn_ = [0usize; NUM_CLASSES];
    for (ref_label, other) in &pairs {
        if ref_label == other {
            tp[ref_label.index()] += 1;
        } else {
            fn_[ref_label.index()] += 1;
            fp[other.index()] += 1;
        }
    }
    let f1 = |tp: usize, fp: usize, fn_: usize| {
        let denom = 2 * tp + fp + fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * tp as f64 / denom as f64
        }
    };
    let per_class = RefClass::ALL
        .iter()
        .map(|&c| {
            let i = c.index();
            (
                c,
                ClassF1 {
                    f1: f1(tp[i], fp[i], fn_[i]),
                    support: tp[i] + fn_[i],
                },
            )
        })
        .collect();
    let micro_f1 = f1(tp.iter().sum(), fp.iter().sum(), fn_.iter().sum());
    PairwiseF1 {
        per_class,
        micro_f1,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgreementReport {
    pub alpha: f64,
    pub percent_agreement: f64,
    pub per_class_f1: BTreeMap<RefClass, f64>,
    pub micro_f1: f64,
    /// Rows: annotator b; columns: annotator a.
    pub confusion: ConfusionMatrix,
    /// Per-class counts in the adjudicated gold, when available.
    pub support: Option<BTreeMap<RefClass, usize>>,
}

pub fn agreement_report(
    records: &[AnnotationRecord],
    a: &str,
    b: &str,
    gold: Option<&GoldStore>,
) -> Result<AgreementReport> {
    let f1 = pairwise_f1(records, a, b);
    Ok(AgreementReport {
        alpha: krippendorff_alpha(records)?,
        percent_agreement: percent_agreement(records)?,
        per_class_f1: f1.per_class.iter().map(|(c, s)| (*c, s.f1)).collect(),
        micro_f1: f1.micro_f1,
        confusion: confusion(records, a, b),
        support: gold.map(|g| {
            let s = g.support();
            RefClass::ALL.iter().map(|c| (*c, s[c.index()])).collect()
        }),
    })
}

impl AgreementReport {
    pub fn render(&self) -> String {
        let mut out = format!(
            "Krippendorff's alpha: {:.4}\nPercent agreement: {:.2}%\n\n{:<10}{:>8}{:>10}\n",
            self.alpha,
            self.percent_agreement * 100.0,
            "Class",
            "F1",
            "Support"
        );
        for c in RefClass::ALL {
            let support = self
                .support
                .as_ref()
                .map(|s| s[&c].to_string())
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<10}{:>8.1}{:>10}\n",
                c.as_str(),
                self.per_class_f1[&c] * 100.0,
                support
            ));
        }
        let total = self
            .support
            .as_ref()
            .map(|s| s.values().sum::<usize>().to_string())
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<10}{:>8.1}{:>10}\n\n",
            "Total",
            self.micro_f1 * 100.0,
            total
        ));
        out.push_str(&self.confusion.render("b\\a"));
        out
    }
}
