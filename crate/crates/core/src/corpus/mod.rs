//! Parsed debate text: tokens, sentences, segments, and the readers that
//! produce them.
//!
//! A [`Segment`] is one paragraph of a speech. Token heads are 0-based and
//! sentence-local; pronoun instances address tokens by their flat index over
//! the concatenated sentences of a segment.

mod conllu;
mod instances;
mod jsonl;
mod stats;
mod xml;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use instances::{
    context_window, extract_instances, is_first_person_plural, parse_instance_id, split_pair,
    wordform_slot, PairRecord, PronounInstance, FIRST_PERSON_PLURAL, WORDFORM_SLOTS,
};
pub use jsonl::{parse_jsonl, write_jsonl};
pub use stats::{corpus_stats, round1, CorpusStats, GroupBy, GroupStats};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    /// Sentence-local head index; `None` for the root.
    pub head: Option<usize>,
    pub deprel: String,
}

impl Token {
    /// The lemma, or the surface form when the parser left the lemma empty.
    pub fn lemma_or_form(&self) -> &str {
        if self.lemma.is_empty() || self.lemma == "_" {
            &self.form
        } else {
            &self.lemma
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Checks that the heads form a single-rooted tree.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.tokens.len();
        if n == 0 {
            return Err("empty sentence".into());
        }
        let mut roots = 0;
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.index != i {
                return Err(format!(
                    "token {} out of sequence (expected {i})",
                    tok.index
                ));
            }
            match tok.head {
                None => roots += 1,
                Some(h) if h == i => return Err(format!("self-headed token {}", i + 1)),
                Some(h) if h >= n => {
                    return Err(format!(
                        "token {} has head {} outside the sentence",
                        i + 1,
                        h + 1
                    ))
                }
                Some(_) => {}
            }
        }
        match roots {
            0 => return Err("no root token".into()),
            1 => {}
            k => return Err(format!("multiple roots ({k})")),
        }
        // Walk up from every token; a path longer than n revisits a node.
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(h) = self.tokens[cur].head {
                cur = h;
                steps += 1;
                if steps > n {
                    return Err(format!("cycle through token {}", start + 1));
                }
            }
        }
        Ok(())
    }

    pub fn children(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.tokens
            .iter()
            .filter(move |t| t.head == Some(index))
            .map(|t| t.index)
    }
}

/// Party affiliation of a speaker.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    AfD,
    CduCsu,
    Fdp,
    Gruene,
    Linke,
    Spd,
    Fraktionslos,
    #[default]
    Other,
}

impl Party {
    pub const ALL: [Party; 8] = [
        Party::AfD,
        Party::CduCsu,
        Party::Fdp,
        Party::Gruene,
        Party::Linke,
        Party::Spd,
        Party::Fraktionslos,
        Party::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Party::AfD => "AfD",
            Party::CduCsu => "CDU/CSU",
            Party::Fdp => "FDP",
            Party::Gruene => "GRÜNE",
            Party::Linke => "LINKE",
            Party::Spd => "SPD",
            Party::Fraktionslos => "fraktionslos",
            Party::Other => "OTHER",
        }
    }

    /// Recognizes the canonical names and the spellings used in the
    /// Bundestag open data. Returns `None` for anything else.
    pub fn recognize(s: &str) -> Option<Party> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !c.is_whitespace())
            .flat_map(char::to_lowercase)
            .collect();
        let party = match norm.as_str() {
            "afd" => Party::AfD,
            "cdu/csu" | "cdu" | "csu" | "union" => Party::CduCsu,
            "fdp" => Party::Fdp,
            "grüne"
            | "grünen"
            | "gruene"
            | "bündnis90/diegrünen"
            | "bündnis90/grüne"
            | "diegrünen" => Party::Gruene,
            "linke" | "dielinke" | "dielinke." => Party::Linke,
            "spd" => Party::Spd,
            "fraktionslos" | "parteilos" => Party::Fraktionslos,
            "other" => Party::Other,
            _ => return None,
        };
        Some(party)
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Party {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Party {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(Party::recognize(&s).unwrap_or(Party::Other))
    }
}

/// One paragraph of a speech together with its speech metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub doc_id: String,
    pub segment_index: usize,
    pub sentences: Vec<Sentence>,
    pub speaker: String,
    pub party: Party,
    pub date: Option<NaiveDate>,
}

impl Segment {
    pub fn key(&self) -> (&str, usize) {
        (&self.doc_id, self.segment_index)
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Tokens in reading order across sentence boundaries.
    pub fn tokens(&self) -> impl Iterator<Item = &Token> + '_ {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    pub fn token(&self, flat: usize) -> Option<&Token> {
        let (s, i) = self.locate(flat)?;
        self.sentences.get(s).and_then(|sent| sent.tokens.get(i))
    }

    /// Maps a flat token index to `(sentence, sentence-local index)`.
    pub fn locate(&self, flat: usize) -> Option<(usize, usize)> {
        let mut offset = 0;
        for (s, sent) in self.sentences.iter().enumerate() {
            if flat < offset + sent.len() {
                return Some((s, flat - offset));
            }
            offset += sent.len();
        }
        None
    }

    /// Flat index of the first token of every sentence.
    pub fn sentence_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.sentences.len());
        let mut offset = 0;
        for sent in &self.sentences {
            out.push(offset);
            offset += sent.len();
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.sentences.is_empty() {
            return Err(self.tree_error("segment has no sentences".into()));
        }
        for (i, sent) in self.sentences.iter().enumerate() {
            sent.validate()
                .map_err(|m| self.tree_error(format!("sentence {}: {m}", i + 1)))?;
        }
        Ok(())
    }

    fn tree_error(&self, message: String) -> Error {
        Error::MalformedTree {
            doc_id: self.doc_id.clone(),
            segment_index: self.segment_index,
            message,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Conllu,
    DebateXml,
    Jsonl,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conllu" | "conll-u" | "conll" => Ok(Format::Conllu),
            "debate-xml" | "xml" => Ok(Format::DebateXml),
            "jsonl" | "json" => Ok(Format::Jsonl),
            other => Err(Error::Invalid(format!("unknown corpus format {other:?}"))),
        }
    }
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "conllu" | "conll" => Some(Format::Conllu),
            "xml" => Some(Format::DebateXml),
            "jsonl" => Some(Format::Jsonl),
            _ => None,
        }
    }
}

/// A segment dropped during ingestion, with its diagnostic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub doc_id: String,
    pub segment_index: usize,
    pub message: String,
}

/// Outcome of reading a corpus file.
#[derive(Clone, Debug, Default)]
pub struct Ingested {
    pub segments: Vec<Segment>,
    pub rejected: Vec<Rejection>,
    pub warnings: Vec<String>,
}

impl Ingested {
    /// Validates the raw segments, drops malformed or duplicate ones, and
    /// sorts the rest by `(doc_id, segment_index)`.
    pub(crate) fn finish(raw: Vec<Segment>, mut warnings: Vec<String>) -> Ingested {
        let mut seen = BTreeMap::new();
        let mut segments = Vec::with_capacity(raw.len());
        let mut rejected = Vec::new();
        for seg in raw {
            let key = (seg.doc_id.clone(), seg.segment_index);
            if seen.contains_key(&key) {
                rejected.push(Rejection {
                    doc_id: seg.doc_id,
                    segment_index: seg.segment_index,
                    message: "duplicate segment index within document".into(),
                });
                continue;
            }
            match seg.validate() {
                Ok(()) => {
                    seen.insert(key, ());
                    segments.push(seg);
                }
                Err(err) => {
                    let message = match err {
                        Error::MalformedTree { message, .. } => message,
                        other => other.to_string(),
                    };
                    log::warn!("rejected {}:{}: {message}", seg.doc_id, seg.segment_index);
                    rejected.push(Rejection {
                        doc_id: seg.doc_id,
                        segment_index: seg.segment_index,
                        message,
                    });
                }
            }
        }
        segments.sort_by(|a, b| a.key().cmp(&b.key()));
        for w in &warnings {
            log::warn!("{w}");
        }
        warnings.dedup();
        Ingested {
            segments,
            rejected,
            warnings,
        }
    }
}

pub(crate) fn resolve_party(raw: &str, context: &str, warnings: &mut Vec<String>) -> Party {
    match Party::recognize(raw) {
        Some(p) => p,
        None => {
            warnings.push(format!("{context}: unknown party {raw:?} mapped to OTHER"));
            Party::Other
        }
    }
}

pub fn ingest_str(text: &str, format: Format) -> Result<Ingested> {
    match format {
        Format::Conllu => conllu::parse_conllu(text),
        Format::DebateXml => xml::parse_debate_xml(text),
        Format::Jsonl => parse_jsonl(text),
    }
}

pub fn ingest(path: impl AsRef<Path>, format: Format) -> Result<Ingested> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ingest_str(&text, format)
}

/// Shared, id-addressable view over a corpus.
#[derive(Clone, Debug, Default)]
pub struct SegmentIndex {
    segments: Vec<Arc<Segment>>,
    by_key: HashMap<(String, usize), usize>,
}

impl SegmentIndex {
    pub fn new(segments: impl IntoIterator<Item = Segment>) -> Self {
        let segments: Vec<Arc<Segment>> = segments.into_iter().map(Arc::new).collect();
        let by_key = segments
            .iter()
            .enumerate()
            .map(|(i, s)| ((s.doc_id.clone(), s.segment_index), i))
            .collect();
        SegmentIndex { segments, by_key }
    }

    pub fn segments(&self) -> &[Arc<Segment>] {
        &self.segments
    }

    pub fn get(&self, doc_id: &str, segment_index: usize) -> Option<&Arc<Segment>> {
        self.by_key
            .get(&(doc_id.to_string(), segment_index))
            .map(|&i| &self.segments[i])
    }

    pub fn segment_of(&self, instance: &PronounInstance) -> Option<&Arc<Segment>> {
        self.get(&instance.doc_id, instance.segment_index)
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}
