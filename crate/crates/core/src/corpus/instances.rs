use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Segment, Token};
use crate::annotation::RefClass;

/// Case-folded first-person-plural forms: `wir`, `uns`, and the possessive
/// paradigm built from the stems `unser-`/`unsr-`.
pub const FIRST_PERSON_PLURAL: [&str; 13] = [
    "wir", "uns", "unser", "unsere", "unserem", "unseren", "unserer", "unseres", "unsre", "unsrem",
    "unsren", "unsrer", "unsres",
];

/// Word-form indicator slots: every inventory form in lowercase and
/// capitalized spelling.
pub const WORDFORM_SLOTS: usize = FIRST_PERSON_PLURAL.len() * 2;

pub fn is_first_person_plural(form: &str) -> bool {
    let lower = form.to_lowercase();
    FIRST_PERSON_PLURAL.contains(&lower.as_str())
}

fn capitalized_forms() -> &'static [String] {
    static FORMS: OnceLock<Vec<String>> = OnceLock::new();
    FORMS.get_or_init(|| {
        FIRST_PERSON_PLURAL
            .iter()
            .map(|f| {
                let mut c = f.chars();
                let first = c.next().unwrap().to_uppercase().collect::<String>();
                first + c.as_str()
            })
            .collect()
    })
}

/// Indicator slot for a pronoun surface form. Lowercase and capitalized
/// spellings get their own slots; other casings (`WIR`) share the
/// lowercase slot.
pub fn wordform_slot(form: &str) -> Option<usize> {
    let n = FIRST_PERSON_PLURAL.len();
    if let Some(i) = FIRST_PERSON_PLURAL.iter().position(|f| *f == form) {
        return Some(i);
    }
    if let Some(i) = capitalized_forms().iter().position(|f| f == form) {
        return Some(n + i);
    }
    let lower = form.to_lowercase();
    FIRST_PERSON_PLURAL.iter().position(|f| *f == lower)
}

/// One occurrence of a first-person-plural pronoun.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PronounInstance {
    /// `doc_id:segment_index:flat_token_index`
    pub instance_id: String,
    pub form: String,
    pub doc_id: String,
    pub segment_index: usize,
    pub flat_token_index: usize,
}

impl PronounInstance {
    pub fn new(doc_id: &str, segment_index: usize, flat_token_index: usize, form: &str) -> Self {
        PronounInstance {
            instance_id: format!("{doc_id}:{segment_index}:{flat_token_index}"),
            form: form.to_string(),
            doc_id: doc_id.to_string(),
            segment_index,
            flat_token_index,
        }
    }

    fn sort_key(&self) -> (&str, usize, usize) {
        (&self.doc_id, self.segment_index, self.flat_token_index)
    }
}

/// Splits an instance id into `(doc_id, segment_index, flat_token_index)`.
/// Document ids may themselves contain colons.
pub fn parse_instance_id(id: &str) -> Option<(&str, usize, usize)> {
    let mut parts = id.rsplitn(3, ':');
    let flat = parts.next()?.parse().ok()?;
    let seg = parts.next()?.parse().ok()?;
    let doc = parts.next()?;
    Some((doc, seg, flat))
}

fn segment_instances(seg: &Segment) -> Vec<PronounInstance> {
    seg.tokens()
        .enumerate()
        .filter(|(_, t)| is_first_person_plural(&t.form))
        .map(|(i, t)| PronounInstance::new(&seg.doc_id, seg.segment_index, i, &t.form))
        .collect()
}

/// All pronoun instances, ordered by `(doc_id, segment_index, flat index)`.
pub fn extract_instances(segments: &[Segment]) -> Vec<PronounInstance> {
    let mut out: Vec<PronounInstance> = segments.par_iter().flat_map(segment_instances).collect();
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    out
}

/// Up to `width` tokens on each side of the pronoun, within its segment.
pub fn context_window(
    segment: &Segment,
    flat_token_index: usize,
    width: usize,
) -> (Vec<&Token>, Vec<&Token>) {
    let tokens: Vec<&Token> = segment.tokens().collect();
    let pos = flat_token_index.min(tokens.len());
    let left_start = pos.saturating_sub(width);
    let right_start = (pos + 1).min(tokens.len());
    let right_end = (right_start + width).min(tokens.len());
    (
        tokens[left_start..pos].to_vec(),
        tokens[right_start..right_end].to_vec(),
    )
}

/// Sentence-pair encoding: everything before the pronoun, and the pronoun
/// with everything after it, both space-joined.
pub fn split_pair(segment: &Segment, flat_token_index: usize) -> (String, String) {
    let forms: Vec<&str> = segment.tokens().map(|t| t.form.as_str()).collect();
    let pos = flat_token_index.min(forms.len());
    (forms[..pos].join(" "), forms[pos..].join(" "))
}

/// One line of the pair export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub instance_id: String,
    pub s1: String,
    pub s2: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<RefClass>,
}
