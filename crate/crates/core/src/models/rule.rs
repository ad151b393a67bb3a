use std::collections::BTreeMap;

use super::Classifier;
use crate::annotation::RefClass;
use crate::corpus::Segment;
use crate::dataset::Item;
use crate::depmatch::{match_all, match_segment, PatternSet};
use crate::error::{Error, Result};
use crate::weaksup::{label_votes, LabelModelParams};

/// Labels every instance some pattern fires on; conflicting votes are
/// resolved by the label model.
#[derive(Clone, Debug)]
pub struct RuleModel {
    pub patterns: PatternSet,
    pub params: LabelModelParams,
}

impl RuleModel {
    pub fn new(patterns: PatternSet, params: LabelModelParams) -> Result<Self> {
        if patterns.names() != params.lfs {
            return Err(Error::Invalid(
                "label-model parameters were fitted on a different pattern set".into(),
            ));
        }
        Ok(RuleModel { patterns, params })
    }

    /// Labels for every instance with at least one hit, keyed by instance id.
    pub fn predict_segments(&self, segments: &[Segment]) -> BTreeMap<String, RefClass> {
        let hits = match_all(&self.patterns, segments);
        let col: BTreeMap<&str, usize> = self
            .patterns
            .iter()
            .enumerate()
            .map(|(j, p)| (p.name.as_str(), j))
            .collect();
        let mut votes: BTreeMap<String, Vec<Option<RefClass>>> = BTreeMap::new();
        for m in hits.matches {
            let row = votes
                .entry(m.instance_id)
                .or_insert_with(|| vec![None; self.patterns.len()]);
            row[col[m.pattern_name.as_str()]] = Some(m.label);
        }
        votes
            .into_iter()
            .map(|(id, row)| {
                let label = label_votes(&self.params, &row);
                (id, label)
            })
            .collect()
    }
}

impl Classifier for RuleModel {
    fn predict(&self, item: &Item) -> Option<RefClass> {
        let anchor = item.instance.flat_token_index;
        let row: Vec<Option<RefClass>> = self
            .patterns
            .iter()
            .map(|p| {
                match_segment(p, &item.segment)
                    .iter()
                    .any(|m| m.anchor == anchor)
                    .then_some(p.label)
            })
            .collect();
        row.iter()
            .any(Option::is_some)
            .then(|| label_votes(&self.params, &row))
    }
}
