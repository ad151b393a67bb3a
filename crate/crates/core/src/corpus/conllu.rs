use chrono::NaiveDate;

use super::{resolve_party, Ingested, Party, Segment, Sentence, Token};
use crate::error::{Error, Result};

#[derive(Clone, Default)]
struct Meta {
    doc_id: Option<String>,
    segment: Option<usize>,
    speaker: String,
    party: Option<Party>,
    date: Option<NaiveDate>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        context: "CoNLL-U".into(),
        line,
        message: message.into(),
    }
}

/// Reads CoNLL-U text. Metadata comments (`# doc_id`, `# segment`,
/// `# speaker`, `# party`, `# date`) stay in force until overridden;
/// consecutive sentences sharing `(doc_id, segment)` form one segment.
pub(crate) fn parse_conllu(text: &str) -> Result<Ingested> {
    let mut meta = Meta::default();
    let mut warnings = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut sentence_start = 0;

    let mut flush = |tokens: &mut Vec<Token>, meta: &Meta, line: usize| -> Result<()> {
        if tokens.is_empty() {
            return Ok(());
        }
        let doc_id = meta
            .doc_id
            .clone()
            .ok_or_else(|| parse_error(line, "sentence without a preceding `# doc_id`"))?;
        let segment_index = meta
            .segment
            .ok_or_else(|| parse_error(line, "sentence without a preceding `# segment`"))?;
        let sentence = Sentence::new(std::mem::take(tokens));
        match segments.last_mut() {
            Some(seg) if seg.doc_id == doc_id && seg.segment_index == segment_index => {
                seg.sentences.push(sentence);
            }
            _ => segments.push(Segment {
                doc_id,
                segment_index,
                sentences: vec![sentence],
                speaker: meta.speaker.clone(),
                party: meta.party.unwrap_or(Party::Other),
                date: meta.date,
            }),
        }
        Ok(())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut tokens, &meta, sentence_start)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let Some((key, value)) = comment.split_once('=') else {
                continue;
            };
            let value = value.trim();
            match key.trim() {
                "doc_id" | "newdoc id" => meta.doc_id = Some(value.to_string()),
                "segment" => {
                    let idx = value
                        .parse()
                        .map_err(|_| parse_error(lineno, format!("bad segment index {value:?}")))?;
                    meta.segment = Some(idx);
                }
                "speaker" => meta.speaker = value.to_string(),
                "party" => {
                    let ctx = format!("line {lineno}");
                    meta.party = Some(resolve_party(value, &ctx, &mut warnings));
                }
                "date" => {
                    let date = NaiveDate::parse_from_str(value, "%Y-%m-%d")
                        .map_err(|_| parse_error(lineno, format!("bad date {value:?}")))?;
                    meta.date = Some(date);
                }
                _ => {}
            }
            continue;
        }
        if tokens.is_empty() {
            sentence_start = lineno;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(parse_error(
                lineno,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        // Multiword ranges and empty nodes carry no tree position.
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| parse_error(lineno, format!("bad token id {:?}", cols[0])))?;
        if id != tokens.len() + 1 {
            return Err(parse_error(
                lineno,
                format!(
                    "token id {id} out of sequence (expected {})",
                    tokens.len() + 1
                ),
            ));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| parse_error(lineno, format!("bad head {:?}", cols[6])))?;
        tokens.push(Token {
            index: id - 1,
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            head: head.checked_sub(1),
            deprel: cols[7].to_string(),
        });
    }
    flush(&mut tokens, &meta, sentence_start)?;
    Ok(Ingested::finish(segments, warnings))
}
