use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::annotation::{RefClass, NUM_CLASSES};
use crate::dataset::Item;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormStats {
    pub label: RefClass,
    pub counts: [usize; NUM_CLASSES],
}

impl FormStats {
    pub fn support(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Number of distinct labels seen with this form.
    pub fn distinct_labels(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn majority_count(&self) -> usize {
        self.counts[self.label.index()]
    }
}

/// Most frequent label per case-sensitive pronoun form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityModel {
    pub forms: BTreeMap<String, FormStats>,
    pub lowercase: BTreeMap<String, FormStats>,
    pub global: FormStats,
}

/// Plurality class; ties go to the class that is more frequent overall,
/// then to canonical order.
fn plurality(counts: &[usize; NUM_CLASSES], global: &[usize; NUM_CLASSES]) -> RefClass {
    let mut best = 0;
    for k in 1..NUM_CLASSES {
        if (counts[k], global[k]) > (counts[best], global[best]) {
            best = k;
        }
    }
    RefClass::ALL[best]
}

pub fn fit_majority(items: &[Item], labels: &[RefClass]) -> Result<MajorityModel> {
    if items.is_empty() {
        return Err(Error::InsufficientData(
            "majority baseline needs training instances".into(),
        ));
    }
    if items.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: items.len(),
            actual: labels.len(),
        });
    }
    let mut global = [0usize; NUM_CLASSES];
    let mut forms: BTreeMap<String, [usize; NUM_CLASSES]> = BTreeMap::new();
    let mut lower: BTreeMap<String, [usize; NUM_CLASSES]> = BTreeMap::new();
    for (item, label) in items.iter().zip(labels) {
        global[label.index()] += 1;
        forms
            .entry(item.form().to_string())
            .or_insert([0; NUM_CLASSES])[label.index()] += 1;
        lower
            .entry(item.form().to_lowercase())
            .or_insert([0; NUM_CLASSES])[label.index()] += 1;
    }
    let stats = |counts: [usize; NUM_CLASSES]| FormStats {
        label: plurality(&counts, &global),
        counts,
    };
    Ok(MajorityModel {
        forms: forms.into_iter().map(|(f, c)| (f, stats(c))).collect(),
        lowercase: lower.into_iter().map(|(f, c)| (f, stats(c))).collect(),
        global: stats(global),
    })
}

impl MajorityModel {
    /// Exact form, then lowercased form, then the overall majority.
    pub fn predict_form(&self, form: &str) -> RefClass {
        if let Some(s) = self.forms.get(form) {
            return s.label;
        }
        if let Some(s) = self.lowercase.get(&form.to_lowercase()) {
            return s.label;
        }
        self.global.label
    }

    /// One row per form: label, majority count over support, and the
    /// number of distinct labels (DL).
    pub fn report(&self) -> String {
        let mut s = String::from("form\tlabel\tmajority/support\tDL\n");
        let mut rows: Vec<(&String, &FormStats)> = self.forms.iter().collect();
        rows.sort_by(|a, b| b.1.support().cmp(&a.1.support()).then(a.0.cmp(b.0)));
        for (form, st) in rows {
            let _ = writeln!(
                s,
                "{form}\t{}\t({}/{})\t{}",
                st.label,
                st.majority_count(),
                st.support(),
                st.distinct_labels()
            );
        }
        let g = &self.global;
        let _ = writeln!(
            s,
            "ALL\t{}\t({}/{})\t{}",
            g.label,
            g.majority_count(),
            g.support(),
            g.distinct_labels()
        );
        s
    }
}

impl Classifier for MajorityModel {
    fn predict(&self, item: &Item) -> Option<RefClass> {
        Some(self.predict_form(item.form()))
    }
}
