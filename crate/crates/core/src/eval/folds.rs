use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{read_jsonl, RefClass};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvPlan {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for CvPlan {
    fn default() -> Self {
        CvPlan {
            k: 5,
            seed: 42,
            stratified: true,
        }
    }
}

/// A materialized fold assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Folds {
    pub k: usize,
    pub assignment: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct FoldRow {
    instance_id: String,
    fold: usize,
}

/// Assigns each instance to one of `k` folds. With stratification each
/// class is shuffled and dealt round-robin, continuing where the previous
/// class stopped, so class counts per fold differ by at most one.
pub fn make_folds(gold: &BTreeMap<String, RefClass>, plan: &CvPlan) -> Result<Folds> {
    if plan.k < 2 {
        return Err(Error::Invalid(format!(
            "need at least 2 folds, got {}",
            plan.k
        )));
    }
    if gold.len() < plan.k {
        return Err(Error::InsufficientData(format!(
            "{} instances cannot fill {} folds",
            gold.len(),
            plan.k
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let groups: Vec<(Option<RefClass>, Vec<&String>)> = if plan.stratified {
        RefClass::ALL
            .iter()
            .map(|&c| {
                (
                    Some(c),
                    gold.iter()
                        .filter(|(_, l)| **l == c)
                        .map(|(id, _)| id)
                        .collect(),
                )
            })
            .collect()
    } else {
        vec![(None, gold.keys().collect())]
    };
    let mut assignment = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut next = 0;
    for (class, mut ids) in groups {
        if ids.is_empty() {
            continue;
        }
        if let Some(c) = class {
            if ids.len() < plan.k {
                warnings.push(format!(
                    "class {c} has {} instances for {} folds; some folds get none",
                    ids.len(),
                    plan.k
                ));
            }
        }
        ids.shuffle(&mut rng);
        for id in ids {
            assignment.insert(id.clone(), next);
            next = (next + 1) % plan.k;
        }
    }
    Ok(Folds {
        k: plan.k,
        assignment,
        warnings,
    })
}

impl Folds {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    /// Instance ids in fold `f`, sorted.
    pub fn members(&self, f: usize) -> Vec<&str> {
        self.assignment
            .iter()
            .filter(|(_, &g)| g == f)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// JSONL `{instance_id, fold}` sorted by instance id.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for (id, &fold) in &self.assignment {
            let row = FoldRow {
                instance_id: id.clone(),
                fold,
            };
            let _ = writeln!(
                s,
                "{}",
                serde_json::to_string(&row).expect("fold row serializes")
            );
        }
        s
    }
}

pub fn read_folds(text: &str) -> Result<Folds> {
    let rows: Vec<FoldRow> = read_jsonl(text, "fold file")?;
    let mut assignment = BTreeMap::new();
    for r in rows {
        if assignment.insert(r.instance_id.clone(), r.fold).is_some() {
            return Err(Error::Invalid(format!(
                "instance {} assigned twice",
                r.instance_id
            )));
        }
    }
    let k = assignment.values().max().map_or(0, |m| m + 1);
    if k < 2 || (0..k).any(|f| !assignment.values().any(|&g| g == f)) {
        return Err(Error::Invalid(
            "fold numbers must be 0..k with k >= 2 and no empty fold".into(),
        ));
    }
    Ok(Folds {
        k,
        assignment,
        warnings: Vec::new(),
    })
}
