use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::pattern::{EdgeOp, Pattern, PatternSet};
use crate::annotation::{RefClass, NUM_CLASSES};
use crate::corpus::{PronounInstance, Segment, Token};

/// One pattern hit, deduplicated per anchor pronoun.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Match {
    pub pattern_name: String,
    pub label: RefClass,
    pub instance_id: String,
    /// Flat index of the anchor token within its segment.
    pub anchor: usize,
    /// Node id to flat token index.
    pub bindings: BTreeMap<String, usize>,
}

fn candidates(
    pattern: &Pattern,
    tokens: &[Token],
    step_edge: usize,
    node_is_to: bool,
    other: usize,
) -> Vec<usize> {
    let e = &pattern.edges[step_edge];
    let n = tokens.len();
    let children = |of: usize| (0..n).filter(move |&i| tokens[i].head == Some(of));
    match (e.op, node_is_to) {
        (EdgeOp::Child, true) => children(other).collect(),
        (EdgeOp::Child, false) => tokens[other].head.into_iter().collect(),
        (EdgeOp::Head, true) => tokens[other].head.into_iter().collect(),
        (EdgeOp::Head, false) => children(other).collect(),
        (EdgeOp::ImmRight, true) => (other + 1 < n).then_some(other + 1).into_iter().collect(),
        (EdgeOp::ImmRight, false) => other.checked_sub(1).into_iter().collect(),
        (EdgeOp::ImmLeft, true) => other.checked_sub(1).into_iter().collect(),
        (EdgeOp::ImmLeft, false) => (other + 1 < n).then_some(other + 1).into_iter().collect(),
        (EdgeOp::Right, true) => (other + 1..n).collect(),
        (EdgeOp::Right, false) => (0..other).collect(),
    }
}

/// Extends `binding` along the plan; records every complete binding whose
/// node positions (in declaration order) beat the current best.
fn search(
    pattern: &Pattern,
    tokens: &[Token],
    step: usize,
    binding: &mut Vec<Option<usize>>,
    best: &mut Option<Vec<usize>>,
) {
    if step == pattern.plan.len() {
        let full: Vec<usize> = binding
            .iter()
            .map(|b| b.expect("all nodes bound"))
            .collect();
        if best.as_ref().is_none_or(|b| full < *b) {
            *best = Some(full);
        }
        return;
    }
    let st = pattern.plan[step];
    let e = &pattern.edges[st.edge];
    let other_node = if st.node_is_to { e.from } else { e.to };
    let other = binding[other_node].expect("plan binds the other end first");
    for cand in candidates(pattern, tokens, st.edge, st.node_is_to, other) {
        if binding.contains(&Some(cand)) || !pattern.nodes[st.node].accepts(&tokens[cand]) {
            continue;
        }
        let (from, to) = if st.node_is_to {
            (other, cand)
        } else {
            (cand, other)
        };
        if !e.holds(tokens, from, to) {
            continue;
        }
        binding[st.node] = Some(cand);
        search(pattern, tokens, step + 1, binding, best);
        binding[st.node] = None;
    }
}

/// All matches of one pattern in a segment, ordered by anchor position.
/// When several bindings share an anchor, the one with the smallest token
/// positions (in node declaration order) is reported.
pub fn match_segment(pattern: &Pattern, segment: &Segment) -> Vec<Match> {
    let mut out = Vec::new();
    let mut offset = 0;
    for sent in &segment.sentences {
        let tokens = &sent.tokens;
        for a in 0..tokens.len() {
            if !pattern.nodes[pattern.anchor].accepts(&tokens[a]) {
                continue;
            }
            let mut binding = vec![None; pattern.nodes.len()];
            binding[pattern.anchor] = Some(a);
            let mut best = None;
            search(pattern, tokens, 0, &mut binding, &mut best);
            if let Some(best) = best {
                let anchor = offset + a;
                out.push(Match {
                    pattern_name: pattern.name.clone(),
                    label: pattern.label,
                    instance_id: PronounInstance::new(
                        &segment.doc_id,
                        segment.segment_index,
                        anchor,
                        &tokens[a].form,
                    )
                    .instance_id,
                    anchor,
                    bindings: pattern
                        .nodes
                        .iter()
                        .zip(best)
                        .map(|(n, pos)| (n.id.clone(), offset + pos))
                        .collect(),
                });
            }
        }
        offset += tokens.len();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternHits {
    pub name: String,
    pub label: RefClass,
    pub count: usize,
}

/// Hit counts per pattern and per class, plus the matches themselves.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitTable {
    pub per_pattern: Vec<PatternHits>,
    pub per_class: [usize; NUM_CLASSES],
    /// Ordered by segment, then anchor, then pattern order.
    pub matches: Vec<Match>,
}

impl HitTable {
    pub fn total(&self) -> usize {
        self.per_class.iter().sum()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("pattern\tlabel\thits\n");
        for p in &self.per_pattern {
            out.push_str(&format!("{}\t{}\t{}\n", p.name, p.label, p.count));
        }
        for c in RefClass::ALL {
            out.push_str(&format!("TOTAL\t{}\t{}\n", c, self.per_class[c.index()]));
        }
        out.push_str(&format!("TOTAL\tALL\t{}\n", self.total()));
        out
    }
}

pub fn match_all(patterns: &PatternSet, segments: &[Segment]) -> HitTable {
    let per_segment: Vec<Vec<Match>> = segments
        .par_iter()
        .map(|seg| {
            let mut ms: Vec<(usize, usize, Match)> = patterns
                .iter()
                .enumerate()
                .flat_map(|(pi, p)| {
                    match_segment(p, seg)
                        .into_iter()
                        .map(move |m| (m.anchor, pi, m))
                })
                .collect();
            ms.sort_by_key(|(anchor, pi, _)| (*anchor, *pi));
            ms.into_iter().map(|(_, _, m)| m).collect()
        })
        .collect();
    let matches: Vec<Match> = per_segment.into_iter().flatten().collect();
    let mut counts = vec![0usize; patterns.len()];
    let index: BTreeMap<&str, usize> = patterns
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();
    let mut per_class = [0usize; NUM_CLASSES];
    for m in &matches {
        counts[index[m.pattern_name.as_str()]] += 1;
        per_class[m.label.index()] += 1;
    }
    HitTable {
        per_pattern: patterns
            .iter()
            .zip(counts)
            .map(|(p, count)| PatternHits {
                name: p.name.clone(),
                label: p.label,
                count,
            })
            .collect(),
        per_class,
        matches,
    }
}
