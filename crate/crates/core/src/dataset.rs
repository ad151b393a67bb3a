//! Pronoun instances joined to their segments, with labels kept apart so
//! that trainers only ever see the labels they are handed.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::annotation::{GoldStore, RefClass};
use crate::corpus::{
    extract_instances, parse_instance_id, PronounInstance, Segment, SegmentIndex, Token,
};
use crate::error::{Error, Result};

/// A pronoun occurrence together with the segment it lives in.
#[derive(Clone, Debug)]
pub struct Item {
    pub instance: PronounInstance,
    pub segment: Arc<Segment>,
}

impl Item {
    pub fn id(&self) -> &str {
        &self.instance.instance_id
    }

    pub fn form(&self) -> &str {
        &self.instance.form
    }

    pub fn token(&self) -> &Token {
        self.segment
            .token(self.instance.flat_token_index)
            .expect("instance index lies inside its segment")
    }
}

/// Looks up an instance id in the corpus. The token at the addressed
/// position must be a first-person-plural form.
pub fn resolve(index: &SegmentIndex, instance_id: &str) -> Result<Item> {
    let unknown = || Error::UnknownInstance(instance_id.to_string());
    let (doc, seg, flat) = parse_instance_id(instance_id).ok_or_else(unknown)?;
    let segment = index.get(doc, seg).ok_or_else(unknown)?;
    let token = segment.token(flat).ok_or_else(unknown)?;
    if !crate::corpus::is_first_person_plural(&token.form) {
        return Err(Error::Invalid(format!(
            "instance {instance_id} points at {:?}, which is not a first-person-plural form",
            token.form
        )));
    }
    Ok(Item {
        instance: PronounInstance::new(doc, seg, flat, &token.form),
        segment: Arc::clone(segment),
    })
}

/// Every pronoun instance in the corpus, in corpus order.
pub fn all_items(index: &SegmentIndex) -> Vec<Item> {
    let mut out = Vec::new();
    for seg in index.segments() {
        for inst in extract_instances(std::slice::from_ref(seg.as_ref())) {
            out.push(Item {
                instance: inst,
                segment: Arc::clone(seg),
            });
        }
    }
    out
}

/// Labeled items in instance-id order.
#[derive(Clone, Debug, Default)]
pub struct LabeledSet {
    pub items: Vec<Item>,
    pub labels: Vec<RefClass>,
}

impl LabeledSet {
    /// Joins gold labels to the corpus. Every gold id must resolve.
    pub fn from_gold(index: &SegmentIndex, gold: &GoldStore) -> Result<LabeledSet> {
        let mut items = Vec::with_capacity(gold.len());
        let mut labels = Vec::with_capacity(gold.len());
        for entry in gold.entries() {
            items.push(resolve(index, &entry.instance_id)?);
            labels.push(entry.label);
        }
        Ok(LabeledSet { items, labels })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<&str> {
        self.items.iter().map(Item::id).collect()
    }

    pub fn push(&mut self, item: Item, label: RefClass) {
        self.items.push(item);
        self.labels.push(label);
    }

    /// The subset at the given positions, in that order.
    pub fn select(&self, positions: &[usize]) -> LabeledSet {
        LabeledSet {
            items: positions.iter().map(|&i| self.items[i].clone()).collect(),
            labels: positions.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Item, RefClass)> + '_ {
        self.items.iter().zip(self.labels.iter().copied())
    }
}
