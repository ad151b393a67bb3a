//! Random sentences and patterns, and an exhaustive binding enumerator to
//! check the matcher against.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wirref_core::corpus::Party;
use wirref_core::depmatch::{compile, match_segment};
use wirref_core::{Segment, Sentence, Token};

const FORMS: &[&str] = &["wir", "uns", "Wir", "unser", "Haus", "gehen", "und"];
const LEMMAS: &[&str] = &["wir", "haus", "gehen", "und"];
const UPOS: &[&str] = &["PRON", "NOUN", "VERB"];
const DEPRELS: &[&str] = &["sb", "nsubj", "oa", "mo"];
const OPS: &[&str] = &["CHILD", "HEAD", "IMM_RIGHT", "IMM_LEFT", "RIGHT"];
pub const PRONOUNS: &[&str] = &[
    "wir", "uns", "unser", "unsere", "unserer", "unseres", "unserem", "unseren", "unsre", "unsrer",
    "unsres", "unsrem", "unsren",
];

pub fn random_sentence(rng: &mut ChaCha8Rng) -> Sentence {
    let n = rng.random_range(1..=8);
    // attach tokens in a random order so that every shape of tree can occur
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut heads = vec![None; n];
    for k in 1..n {
        heads[order[k]] = Some(order[rng.random_range(0..k)]);
    }
    Sentence::new(
        (0..n)
            .map(|i| Token {
                index: i,
                form: FORMS[rng.random_range(0..FORMS.len())].into(),
                lemma: LEMMAS[rng.random_range(0..LEMMAS.len())].into(),
                upos: UPOS[rng.random_range(0..UPOS.len())].into(),
                head: heads[i],
                deprel: DEPRELS[rng.random_range(0..DEPRELS.len())].into(),
            })
            .collect(),
    )
}

pub fn random_segment(rng: &mut ChaCha8Rng) -> Segment {
    let k = rng.random_range(1..=2);
    Segment {
        doc_id: "r".into(),
        segment_index: 0,
        sentences: (0..k).map(|_| random_sentence(rng)).collect(),
        speaker: "x".into(),
        party: Party::Other,
        date: None,
    }
}

#[derive(Debug, Clone)]
pub struct OracleNode {
    pub anchor: bool,
    pub forms: Option<Vec<&'static str>>,
    pub lemmas: Option<Vec<&'static str>>,
    pub upos: Option<Vec<&'static str>>,
}

#[derive(Debug, Clone)]
pub struct OracleEdge {
    pub from: usize,
    pub to: usize,
    pub op: &'static str,
    pub deprels: Option<Vec<&'static str>>,
}

#[derive(Debug, Clone)]
pub struct OraclePattern {
    pub nodes: Vec<OracleNode>,
    pub edges: Vec<OracleEdge>,
}

fn subset(rng: &mut ChaCha8Rng, pool: &[&'static str]) -> Option<Vec<&'static str>> {
    if rng.random_bool(0.5) {
        return None;
    }
    let mut v: Vec<_> = pool
        .iter()
        .copied()
        .filter(|_| rng.random_bool(0.5))
        .collect();
    if v.is_empty() {
        v.push(pool[rng.random_range(0..pool.len())]);
    }
    Some(v)
}

pub fn random_pattern(rng: &mut ChaCha8Rng) -> OraclePattern {
    let k = rng.random_range(1..=3);
    let anchor = rng.random_range(0..k);
    let nodes = (0..k)
        .map(|i| OracleNode {
            anchor: i == anchor,
            forms: subset(rng, FORMS),
            lemmas: subset(rng, LEMMAS),
            upos: subset(rng, UPOS),
        })
        .collect();
    let edges = (1..k)
        .map(|i| {
            let other = rng.random_range(0..i);
            let (from, to) = if rng.random_bool(0.5) {
                (other, i)
            } else {
                (i, other)
            };
            let op = OPS[rng.random_range(0..OPS.len())];
            let deprels = if matches!(op, "CHILD" | "HEAD") {
                subset(rng, &["sb", "oa", "mo"])
            } else {
                None
            };
            OracleEdge {
                from,
                to,
                op,
                deprels,
            }
        })
        .collect();
    OraclePattern { nodes, edges }
}

fn list(v: &[&str]) -> String {
    format!(
        "[{}]",
        v.iter()
            .map(|s| format!("\"{s}\""))
            .collect::<Vec<_>>()
            .join(", ")
    )
}

pub fn to_yaml(p: &OraclePattern) -> String {
    let mut s = String::from("name: random\nlabel: PARTY\nnodes:\n");
    for (i, n) in p.nodes.iter().enumerate() {
        s += &format!("  - id: n{i}\n    anchor: {}\n", n.anchor);
        if let Some(f) = &n.forms {
            s += &format!("    form_regex: \"{}\"\n", f.join("|"));
        }
        if let Some(l) = &n.lemmas {
            s += &format!("    lemma_in: {}\n", list(l));
        }
        if let Some(u) = &n.upos {
            s += &format!("    upos_in: {}\n", list(u));
        }
    }
    if !p.edges.is_empty() {
        s += "edges:\n";
        for e in &p.edges {
            s += &format!(
                "  - from: n{}\n    to: n{}\n    op: {}\n",
                e.from, e.to, e.op
            );
            if let Some(d) = &e.deprels {
                s += &format!("    deprel_in: {}\n", list(d));
            }
        }
    }
    s
}

fn node_ok(n: &OracleNode, t: &Token) -> bool {
    (!n.anchor || PRONOUNS.contains(&t.form.to_lowercase().as_str()))
        && n.forms
            .as_ref()
            .is_none_or(|f| f.contains(&t.form.as_str()))
        && n.lemmas
            .as_ref()
            .is_none_or(|l| l.contains(&t.lemma.as_str()))
        && n.upos.as_ref().is_none_or(|u| u.contains(&t.upos.as_str()))
}

fn rel_ok(allowed: &Option<Vec<&str>>, rel: &str) -> bool {
    allowed
        .as_ref()
        .is_none_or(|a| a.contains(&rel) || (rel == "nsubj" && a.contains(&"sb")))
}

fn edge_ok(e: &OracleEdge, toks: &[Token], from: usize, to: usize) -> bool {
    match e.op {
        "CHILD" => toks[to].head == Some(from) && rel_ok(&e.deprels, &toks[to].deprel),
        "HEAD" => toks[from].head == Some(to) && rel_ok(&e.deprels, &toks[from].deprel),
        "IMM_RIGHT" => to == from + 1,
        "IMM_LEFT" => to + 1 == from,
        "RIGHT" => to > from,
        _ => unreachable!(),
    }
}

/// Every anchor with the smallest satisfying assignment, by exhaustive enumeration.
pub fn enumerate(p: &OraclePattern, seg: &Segment) -> Vec<(usize, Vec<usize>)> {
    let k = p.nodes.len();
    let anchor = p.nodes.iter().position(|n| n.anchor).unwrap();
    let mut best: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut offset = 0;
    for sent in &seg.sentences {
        let toks = &sent.tokens;
        let n = toks.len();
        let total = n.pow(k as u32);
        for code in 0..total {
            let mut c = code;
            let assign: Vec<usize> = (0..k)
                .map(|_| {
                    let v = c % n;
                    c /= n;
                    v
                })
                .collect();
            let distinct = (0..k).all(|i| (i + 1..k).all(|j| assign[i] != assign[j]));
            if !distinct
                || !(0..k).all(|i| node_ok(&p.nodes[i], &toks[assign[i]]))
                || !p
                    .edges
                    .iter()
                    .all(|e| edge_ok(e, toks, assign[e.from], assign[e.to]))
            {
                continue;
            }
            let flat: Vec<usize> = assign.iter().map(|a| a + offset).collect();
            let key = flat[anchor];
            match best.get(&key) {
                Some(b) if *b <= flat => {}
                _ => {
                    best.insert(key, flat);
                }
            }
        }
        offset += n;
    }
    best.into_iter().collect()
}

pub fn observed(p: &OraclePattern, seg: &Segment) -> Vec<(usize, Vec<usize>)> {
    let pat = compile(&to_yaml(p)).expect("random pattern compiles");
    match_segment(&pat, seg)
        .into_iter()
        .map(|m| {
            let tuple = (0..p.nodes.len())
                .map(|i| m.bindings[&format!("n{i}")])
                .collect();
            (m.anchor, tuple)
        })
        .collect()
}
