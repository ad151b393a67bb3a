use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::RefClass;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub instance_id: String,
    pub annotator: String,
    pub label: RefClass,
}

impl AnnotationRecord {
    pub fn new(instance_id: &str, annotator: &str, label: RefClass) -> Self {
        AnnotationRecord {
            instance_id: instance_id.into(),
            annotator: annotator.into(),
            label,
        }
    }
}

pub(crate) fn read_jsonl<T: for<'de> Deserialize<'de>>(
    text: &str,
    context: &str,
) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                context: context.into(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Parses annotation JSONL and rejects a second label for the same
/// `(instance_id, annotator)`.
pub fn read_annotations(text: &str) -> Result<Vec<AnnotationRecord>> {
    let records: Vec<AnnotationRecord> = read_jsonl(text, "annotations")?;
    let mut seen = BTreeSet::new();
    for r in &records {
        if !seen.insert((r.instance_id.as_str(), r.annotator.as_str())) {
            return Err(Error::DuplicateAnnotation {
                instance_id: r.instance_id.clone(),
                annotator: r.annotator.clone(),
            });
        }
    }
    Ok(records)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Both annotators chose this label.
    Agreed,
    /// The annotators disagreed and the label was settled in discussion.
    Resolved,
    /// Supplied directly, without an adjudication step.
    #[default]
    Manual,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldEntry {
    pub instance_id: String,
    pub label: RefClass,
    #[serde(default)]
    pub provenance: Provenance,
}

/// Adjudicated labels keyed by instance id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldStore {
    entries: BTreeMap<String, GoldEntry>,
}

impl GoldStore {
    pub fn from_entries(entries: impl IntoIterator<Item = GoldEntry>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for e in entries {
            if map.contains_key(&e.instance_id) {
                return Err(Error::Invalid(format!(
                    "instance {} labeled twice in gold",
                    e.instance_id
                )));
            }
            map.insert(e.instance_id.clone(), e);
        }
        Ok(GoldStore { entries: map })
    }

    pub fn label(&self, instance_id: &str) -> Option<RefClass> {
        self.entries.get(instance_id).map(|e| e.label)
    }

    pub fn entries(&self) -> impl Iterator<Item = &GoldEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> [usize; super::NUM_CLASSES] {
        let mut out = [0; super::NUM_CLASSES];
        for e in self.entries.values() {
            out[e.label.index()] += 1;
        }
        out
    }
}

pub fn read_gold(text: &str) -> Result<GoldStore> {
    GoldStore::from_entries(read_jsonl::<GoldEntry>(text, "gold")?)
}

pub fn write_gold<W: Write>(gold: &GoldStore, mut out: W) -> std::io::Result<()> {
    for e in gold.entries() {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct ResolutionLine {
    instance_id: String,
    label: RefClass,
}

/// Resolution JSONL: `{instance_id, label}` per disagreement.
pub fn read_resolutions(text: &str) -> Result<BTreeMap<String, RefClass>> {
    Ok(read_jsonl::<ResolutionLine>(text, "resolutions")?
        .into_iter()
        .map(|r| (r.instance_id, r.label))
        .collect())
}

/// Merges two annotators' labels. Agreements are kept; every other instance
/// (disagreements and instances only one annotator labeled) needs an entry
/// in `resolutions`.
pub fn adjudicate(
    records_a: &[AnnotationRecord],
    records_b: &[AnnotationRecord],
    resolutions: &BTreeMap<String, RefClass>,
) -> Result<GoldStore> {
    let a: BTreeMap<&str, RefClass> = records_a
        .iter()
        .map(|r| (r.instance_id.as_str(), r.label))
        .collect();
    let b: BTreeMap<&str, RefClass> = records_b
        .iter()
        .map(|r| (r.instance_id.as_str(), r.label))
        .collect();
    let ids: BTreeSet<&str> = a.keys().chain(b.keys()).copied().collect();
    let mut entries = Vec::with_capacity(ids.len());
    let mut missing = Vec::new();
    for id in ids {
        let entry = match (a.get(id), b.get(id)) {
            (Some(x), Some(y)) if x == y => Some((*x, Provenance::Agreed)),
            _ => resolutions.get(id).map(|l| (*l, Provenance::Resolved)),
        };
        match entry {
            Some((label, provenance)) => entries.push(GoldEntry {
                instance_id: id.to_string(),
                label,
                provenance,
            }),
            None => missing.push(id.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingResolution(missing));
    }
    GoldStore::from_entries(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use RefClass::*;

    fn recs(annotator: &str, labels: &[(&str, RefClass)]) -> Vec<AnnotationRecord> {
        labels
            .iter()
            .map(|(id, l)| AnnotationRecord::new(id, annotator, *l))
            .collect()
    }

    #[test]
    fn full_agreement_needs_no_resolutions() {
        let a = recs("A1", &[("x", Country), ("y", Parl)]);
        let b = recs("A2", &[("x", Country), ("y", Parl)]);
        let gold = adjudicate(&a, &b, &BTreeMap::new()).unwrap();
        assert_eq!(gold.label("x"), Some(Country));
        assert_eq!(gold.label("y"), Some(Parl));
        assert!(gold.entries().all(|e| e.provenance == Provenance::Agreed));
    }

    #[test]
    fn resolution_wins_on_disagreement() {
        let a = recs("A1", &[("x", Country), ("y", Parl)]);
        let b = recs("A2", &[("x", Country), ("y", Govern)]);
        let res = BTreeMap::from([("y".to_string(), Govern)]);
        let gold = adjudicate(&a, &b, &res).unwrap();
        assert_eq!(gold.label("y"), Some(Govern));
        assert_eq!(
            gold.entries()
                .find(|e| e.instance_id == "y")
                .unwrap()
                .provenance,
            Provenance::Resolved
        );
    }

    #[test]
    fn missing_resolution_names_instance() {
        let a = recs("A1", &[("x", Country), ("y", Parl)]);
        let b = recs("A2", &[("x", Union), ("y", Parl)]);
        match adjudicate(&a, &b, &BTreeMap::new()) {
            Err(Error::MissingResolution(ids)) => assert_eq!(ids, vec!["x".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_annotation_rejected() {
        let text = "{\"instance_id\":\"x\",\"annotator\":\"A1\",\"label\":\"PARL\"}\n\
                    {\"instance_id\":\"x\",\"annotator\":\"A1\",\"label\":\"PARTY\"}\n";
        assert!(matches!(
            read_annotations(text),
            Err(Error::DuplicateAnnotation { .. })
        ));
    }

    #[test]
    fn gold_jsonl_round_trip() {
        let gold = GoldStore::from_entries([
            GoldEntry {
                instance_id: "d:0:1".into(),
                label: Union,
                provenance: Provenance::Resolved,
            },
            GoldEntry {
                instance_id: "d:0:5".into(),
                label: Board,
                provenance: Provenance::Agreed,
            },
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_gold(&gold, &mut buf).unwrap();
        let back = read_gold(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, gold);
        // provenance is optional on input
        let plain = read_gold("{\"instance_id\":\"q\",\"label\":\"PARTY\"}").unwrap();
        assert_eq!(
            plain.entries().next().unwrap().provenance,
            Provenance::Manual
        );
    }
}
