use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{resolve_party, Ingested, Party, Segment, Sentence, Token};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct TokenRecord {
    form: String,
    #[serde(default)]
    lemma: String,
    #[serde(default)]
    upos: String,
    head: Option<usize>,
    #[serde(default)]
    deprel: String,
}

#[derive(Serialize, Deserialize)]
struct SegmentRecord {
    doc_id: String,
    segment: usize,
    #[serde(default)]
    speaker: String,
    #[serde(default)]
    party: Option<String>,
    #[serde(default)]
    date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    sentences: Vec<Vec<TokenRecord>>,
    /// Unparsed token lists; each inner list becomes a flat sentence.
    #[serde(default, skip_serializing)]
    text_tokens: Option<TextTokens>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TextTokens {
    Flat(Vec<String>),
    Nested(Vec<Vec<String>>),
}

/// A sentence without a parse: the first token is the root and every other
/// token attaches to it with relation `dep`.
fn flat_sentence(words: Vec<String>) -> Sentence {
    Sentence::new(
        words
            .into_iter()
            .enumerate()
            .map(|(i, form)| Token {
                index: i,
                lemma: form.clone(),
                form,
                upos: "X".into(),
                head: if i == 0 { None } else { Some(0) },
                deprel: "dep".into(),
            })
            .collect(),
    )
}

pub fn parse_jsonl(text: &str) -> Result<Ingested> {
    let mut warnings = Vec::new();
    let mut segments = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: SegmentRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            context: "JSONL segment".into(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        let party = match &rec.party {
            Some(p) => resolve_party(p, &format!("line {}", lineno + 1), &mut warnings),
            None => Party::Other,
        };
        let mut sentences: Vec<Sentence> = rec
            .sentences
            .into_iter()
            .map(|toks| {
                Sentence::new(
                    toks.into_iter()
                        .enumerate()
                        .map(|(i, t)| Token {
                            index: i,
                            form: t.form,
                            lemma: t.lemma,
                            upos: t.upos,
                            head: t.head,
                            deprel: t.deprel,
                        })
                        .collect(),
                )
            })
            .collect();
        if sentences.is_empty() {
            match rec.text_tokens {
                Some(TextTokens::Flat(words)) => sentences.push(flat_sentence(words)),
                Some(TextTokens::Nested(sents)) => {
                    sentences.extend(sents.into_iter().map(flat_sentence))
                }
                None => {}
            }
        }
        segments.push(Segment {
            doc_id: rec.doc_id,
            segment_index: rec.segment,
            sentences,
            speaker: rec.speaker,
            party,
            date: rec.date,
        });
    }
    Ok(Ingested::finish(segments, warnings))
}

/// Writes segments in the JSONL segment format, one object per line.
pub fn write_jsonl<W: Write>(segments: &[Segment], mut out: W) -> std::io::Result<()> {
    for seg in segments {
        let rec = SegmentRecord {
            doc_id: seg.doc_id.clone(),
            segment: seg.segment_index,
            speaker: seg.speaker.clone(),
            party: Some(seg.party.as_str().to_string()),
            date: seg.date,
            sentences: seg
                .sentences
                .iter()
                .map(|s| {
                    s.tokens
                        .iter()
                        .map(|t| TokenRecord {
                            form: t.form.clone(),
                            lemma: t.lemma.clone(),
                            upos: t.upos.clone(),
                            head: t.head,
                            deprel: t.deprel.clone(),
                        })
                        .collect()
                })
                .collect(),
            text_tokens: None,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
