use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{PronounInstance, Segment};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    #[default]
    Party,
    Speaker,
}

impl std::str::FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "party" => Ok(GroupBy::Party),
            "speaker" => Ok(GroupBy::Speaker),
            other => Err(Error::Invalid(format!("cannot group by {other:?}"))),
        }
    }
}

impl GroupBy {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupBy::Party => "party",
            GroupBy::Speaker => "speaker",
        }
    }

    pub fn key(self, seg: &Segment) -> String {
        match self {
            GroupBy::Party => seg.party.as_str().to_string(),
            GroupBy::Speaker => seg.speaker.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupStats {
    pub name: String,
    pub tokens: usize,
    pub instances: usize,
    pub speakers: usize,
    /// Instances per 1000 tokens; `None` when the group has no tokens.
    pub rate_per_1000: Option<f64>,
}

impl GroupStats {
    fn new(name: String, tokens: usize, instances: usize, speakers: usize) -> Self {
        let rate_per_1000 = (tokens > 0).then(|| instances as f64 * 1000.0 / tokens as f64);
        GroupStats {
            name,
            tokens,
            instances,
            speakers,
            rate_per_1000,
        }
    }

    /// The rate as reported in tables: one decimal, or `NONE`.
    pub fn rate_display(&self) -> String {
        match self.rate_per_1000 {
            Some(r) => format!("{:.1}", round1(r)),
            None => "NONE".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusStats {
    pub group_by: GroupBy,
    pub groups: Vec<GroupStats>,
    pub total: GroupStats,
}

impl CorpusStats {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("group\ttokens\tinstances\tspeakers\tper_1000\n");
        for g in self.groups.iter().chain(std::iter::once(&self.total)) {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                g.name,
                g.tokens,
                g.instances,
                g.speakers,
                g.rate_display()
            ));
        }
        out
    }
}

/// Rounds half away from zero to one decimal.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Token, instance and speaker counts per group with per-1000-token rates.
pub fn corpus_stats(
    segments: &[Segment],
    instances: &[PronounInstance],
    group_by: GroupBy,
) -> Result<CorpusStats> {
    let mut seg_group: HashMap<(&str, usize), String> = HashMap::new();
    let mut tokens: BTreeMap<String, usize> = BTreeMap::new();
    let mut speakers: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for seg in segments {
        let g = group_by.key(seg);
        *tokens.entry(g.clone()).or_default() += seg.num_tokens();
        speakers.entry(g.clone()).or_default().insert(&seg.speaker);
        counts.entry(g.clone()).or_default();
        seg_group.insert((&seg.doc_id, seg.segment_index), g);
    }
    for inst in instances {
        let g = seg_group
            .get(&(inst.doc_id.as_str(), inst.segment_index))
            .ok_or_else(|| Error::UnknownInstance(inst.instance_id.clone()))?;
        *counts
            .get_mut(g)
            .expect("group registered with its segment") += 1;
    }
    let groups: Vec<GroupStats> = tokens
        .iter()
        .map(|(g, &t)| GroupStats::new(g.clone(), t, counts[g], speakers[g].len()))
        .collect();
    let all_speakers: BTreeSet<&str> = segments.iter().map(|s| s.speaker.as_str()).collect();
    let total = GroupStats::new(
        "Total".into(),
        groups.iter().map(|g| g.tokens).sum(),
        groups.iter().map(|g| g.instances).sum(),
        all_speakers.len(),
    );
    Ok(CorpusStats {
        group_by,
        groups,
        total,
    })
}
