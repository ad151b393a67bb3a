//! Minimal debate XML:
//!
//! ```xml
//! <debate id="19042" date="2018-06-28">
//!   <speech speaker="Christian Lindner" party="FDP">
//!     <p>
//!       <s>
//!         <t form="Wir" lemma="wir" upos="PRON" head="2" deprel="sb"/>
//!         <t form="Liberale" lemma="Liberale" upos="NOUN" head="0" deprel="ROOT"/>
//!       </s>
//!     </p>
//!   </speech>
//! </debate>
//! ```
//!
//! Heads follow CoNLL-U numbering (1-based, `0` marks the root). Every `<p>`
//! becomes one segment; segment indices count paragraphs per debate.

use chrono::NaiveDate;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{resolve_party, Ingested, Party, Segment, Sentence, Token};
use crate::error::{Error, Result};

fn xml_error(reader: &Reader<&[u8]>, message: impl Into<String>) -> Error {
    Error::Parse {
        context: "debate XML".into(),
        line: 0,
        message: format!("byte {}: {}", reader.buffer_position(), message.into()),
    }
}

fn attr(reader: &Reader<&[u8]>, e: &BytesStart, name: &str) -> Result<Option<String>> {
    for a in e.attributes() {
        let a = a.map_err(|err| xml_error(reader, err.to_string()))?;
        if a.key.as_ref() == name.as_bytes() {
            let v = a
                .unescape_value()
                .map_err(|err| xml_error(reader, err.to_string()))?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn parse_date(reader: &Reader<&[u8]>, v: Option<String>) -> Result<Option<NaiveDate>> {
    v.map(|d| {
        NaiveDate::parse_from_str(&d, "%Y-%m-%d")
            .map_err(|_| xml_error(reader, format!("bad date {d:?}")))
    })
    .transpose()
}

#[derive(Default)]
struct State {
    doc_id: Option<String>,
    doc_date: Option<NaiveDate>,
    paragraph_counter: usize,
    speaker: String,
    party: Party,
    speech_date: Option<NaiveDate>,
    sentences: Option<Vec<Sentence>>,
    tokens: Option<Vec<Token>>,
}

pub(crate) fn parse_debate_xml(text: &str) -> Result<Ingested> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    let mut st = State::default();
    let mut warnings = Vec::new();
    let mut segments = Vec::new();

    loop {
        let event = reader
            .read_event()
            .map_err(|e| xml_error(&reader, e.to_string()))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                match e.name().as_ref() {
                    b"debate" => {
                        st.doc_id = Some(
                            attr(&reader, e, "id")?
                                .ok_or_else(|| xml_error(&reader, "<debate> without id"))?,
                        );
                        st.doc_date = parse_date(&reader, attr(&reader, e, "date")?)?;
                        st.paragraph_counter = 0;
                    }
                    b"speech" => {
                        st.speaker = attr(&reader, e, "speaker")?.unwrap_or_default();
                        st.party = match attr(&reader, e, "party")? {
                            Some(p) => resolve_party(&p, "debate XML", &mut warnings),
                            None => Party::Other,
                        };
                        st.speech_date = parse_date(&reader, attr(&reader, e, "date")?)?;
                    }
                    b"p" if !is_empty => st.sentences = Some(Vec::new()),
                    b"s" if !is_empty => st.tokens = Some(Vec::new()),
                    b"t" => {
                        let tokens = st
                            .tokens
                            .as_mut()
                            .ok_or_else(|| xml_error(&reader, "<t> outside <s>"))?;
                        let form = attr(&reader, e, "form")?
                            .ok_or_else(|| xml_error(&reader, "<t> without form"))?;
                        let head_raw = attr(&reader, e, "head")?
                            .ok_or_else(|| xml_error(&reader, "<t> without head"))?;
                        let head: usize = head_raw
                            .parse()
                            .map_err(|_| xml_error(&reader, format!("bad head {head_raw:?}")))?;
                        tokens.push(Token {
                            index: tokens.len(),
                            form,
                            lemma: attr(&reader, e, "lemma")?.unwrap_or_default(),
                            upos: attr(&reader, e, "upos")?.unwrap_or_default(),
                            head: head.checked_sub(1),
                            deprel: attr(&reader, e, "deprel")?.unwrap_or_default(),
                        });
                    }
                    _ => {}
                }
            }
            Event::End(ref e) => match e.name().as_ref() {
                b"s" => {
                    let tokens = st.tokens.take().unwrap_or_default();
                    if let Some(sents) = st.sentences.as_mut() {
                        sents.push(Sentence::new(tokens));
                    }
                }
                b"p" => {
                    let sentences = st.sentences.take().unwrap_or_default();
                    let doc_id = st
                        .doc_id
                        .clone()
                        .ok_or_else(|| xml_error(&reader, "<p> outside <debate>"))?;
                    segments.push(Segment {
                        doc_id,
                        segment_index: st.paragraph_counter,
                        sentences,
                        speaker: st.speaker.clone(),
                        party: st.party,
                        date: st.speech_date.or(st.doc_date),
                    });
                    st.paragraph_counter += 1;
                }
                b"speech" => st.speech_date = None,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(Ingested::finish(segments, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_speeches_and_paragraphs() {
        let xml = r#"<?xml version="1.0" encoding="UTF-8"?>
<debates>
<debate id="19042" date="2018-06-28">
  <speech speaker="Christian Lindner" party="FDP">
    <p><s>
      <t form="Wir" lemma="wir" upos="PRON" head="2" deprel="sb"/>
      <t form="Liberale" lemma="Liberale" upos="NOUN" head="0" deprel="ROOT"/>
    </s></p>
    <p><s><t form="Danke" lemma="danken" upos="VERB" head="0" deprel="ROOT"/></s></p>
  </speech>
  <speech speaker="N. N." party="Bayernpartei" date="2018-06-29">
    <p><s><t form="Ja" lemma="ja" upos="PART" head="0" deprel="ROOT"/></s></p>
  </speech>
</debate>
</debates>"#;
        let out = parse_debate_xml(xml).unwrap();
        assert_eq!(out.segments.len(), 3);
        let s0 = &out.segments[0];
        assert_eq!(s0.party, Party::Fdp);
        assert_eq!(s0.sentences[0].tokens[0].head, Some(1));
        assert_eq!(s0.date, NaiveDate::from_ymd_opt(2018, 6, 28));
        assert_eq!(out.segments[1].segment_index, 1);
        assert_eq!(out.segments[2].party, Party::Other);
        assert_eq!(out.segments[2].date, NaiveDate::from_ymd_opt(2018, 6, 29));
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn malformed_tree_is_rejected() {
        let xml = r#"<debate id="d"><speech speaker="x" party="SPD"><p><s>
            <t form="a" head="0"/><t form="b" head="0"/></s></p></speech></debate>"#;
        let out = parse_debate_xml(xml).unwrap();
        assert!(out.segments.is_empty());
        assert!(out.rejected[0].message.contains("multiple roots"));
    }
}
