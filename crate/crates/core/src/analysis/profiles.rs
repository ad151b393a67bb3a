use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::annotation::{RefClass, NUM_CLASSES};
use crate::corpus::{parse_instance_id, round1, GroupBy, SegmentIndex};
use crate::error::{Error, Result};

/// Class rates per 1000 tokens for each group, with the raw counts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileMatrix {
    pub group_by: GroupBy,
    pub groups: Vec<String>,
    pub tokens: Vec<usize>,
    pub counts: Vec<[usize; NUM_CLASSES]>,
    pub rates: Vec<[f64; NUM_CLASSES]>,
    pub warnings: Vec<String>,
}

/// Joins labels to their segments and counts labels and tokens per group.
/// Token totals cover every segment of the group, labeled or not.
pub fn build_profiles<'a>(
    labels: impl IntoIterator<Item = (&'a str, RefClass)>,
    index: &SegmentIndex,
    group_by: GroupBy,
) -> Result<ProfileMatrix> {
    let mut tokens: BTreeMap<String, usize> = BTreeMap::new();
    for seg in index.segments() {
        let key = group_by.key(seg);
        if !key.is_empty() {
            *tokens.entry(key).or_default() += seg.num_tokens();
        }
    }
    let mut counts: BTreeMap<String, [usize; NUM_CLASSES]> = BTreeMap::new();
    for (id, label) in labels {
        let (doc, seg_index, _) =
            parse_instance_id(id).ok_or_else(|| Error::UnknownInstance(id.to_string()))?;
        let seg = index
            .get(doc, seg_index)
            .ok_or_else(|| Error::UnknownInstance(id.to_string()))?;
        let key = group_by.key(seg);
        if key.is_empty() {
            return Err(Error::Invalid(format!(
                "instance {id} belongs to a segment without {} metadata",
                group_by.as_str()
            )));
        }
        counts.entry(key).or_insert([0; NUM_CLASSES])[label.index()] += 1;
    }
    let mut out = ProfileMatrix {
        group_by,
        groups: Vec::new(),
        tokens: Vec::new(),
        counts: Vec::new(),
        rates: Vec::new(),
        warnings: Vec::new(),
    };
    for (group, t) in tokens {
        let c = counts.remove(&group).unwrap_or([0; NUM_CLASSES]);
        if t == 0 {
            out.warnings
                .push(format!("group {group} has no tokens and was dropped"));
            continue;
        }
        let mut r = [0.0; NUM_CLASSES];
        for k in 0..NUM_CLASSES {
            r[k] = c[k] as f64 * 1000.0 / t as f64;
        }
        out.groups.push(group);
        out.tokens.push(t);
        out.counts.push(c);
        out.rates.push(r);
    }
    Ok(out)
}

impl ProfileMatrix {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn rate_rows(&self) -> Vec<Vec<f64>> {
        self.rates.iter().map(|r| r.to_vec()).collect()
    }

    /// Per-class column totals over all groups.
    pub fn class_totals(&self) -> [usize; NUM_CLASSES] {
        let mut t = [0; NUM_CLASSES];
        for c in &self.counts {
            for k in 0..NUM_CLASSES {
                t[k] += c[k];
            }
        }
        t
    }

    /// Wide CSV: group, tokens, then a rate and a count column per class.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["group".to_string(), "tokens".to_string()];
        for c in RefClass::ALL {
            header.push(format!("{c}_per_1000"));
            header.push(format!("{c}_count"));
        }
        w.write_record(&header).expect("in-memory csv");
        for i in 0..self.len() {
            let mut row = vec![self.groups[i].clone(), self.tokens[i].to_string()];
            for k in 0..NUM_CLASSES {
                row.push(self.rates[i][k].to_string());
                row.push(self.counts[i][k].to_string());
            }
            w.write_record(&row).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }

    /// Text table with cells like `11.4 (122)`.
    pub fn render(&self) -> String {
        let mut s = format!("{:<16}", self.group_by.as_str());
        for c in RefClass::ALL {
            let _ = write!(s, "{:>13}", c.as_str());
        }
        s.push('\n');
        for i in 0..self.len() {
            let _ = write!(s, "{:<16}", self.groups[i]);
            for k in 0..NUM_CLASSES {
                let cell = format!("{:.1} ({})", round1(self.rates[i][k]), self.counts[i][k]);
                let _ = write!(s, "{cell:>13}");
            }
            s.push('\n');
        }
        s
    }
}
