use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::annotation::RefClass;
use crate::corpus::{is_first_person_plural, Token};
use crate::error::{Error, Result};

/// Pattern-file node as written by the user.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNode {
    pub id: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub anchor: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form_regex: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma_in: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upos_in: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEdge {
    pub from: String,
    pub to: String,
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deprel_in: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPattern {
    pub name: String,
    pub label: RefClass,
    pub nodes: Vec<RawNode>,
    #[serde(default)]
    pub edges: Vec<RawEdge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeOp {
    /// `to` is a dependent of `from`.
    Child,
    /// `to` is the head of `from`.
    Head,
    /// `to` immediately follows `from`.
    ImmRight,
    /// `to` immediately precedes `from`.
    ImmLeft,
    /// `to` is anywhere after `from` in the sentence.
    Right,
}

impl FromStr for EdgeOp {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "CHILD" => Ok(EdgeOp::Child),
            "HEAD" => Ok(EdgeOp::Head),
            "IMM_RIGHT" => Ok(EdgeOp::ImmRight),
            "IMM_LEFT" => Ok(EdgeOp::ImmLeft),
            "RIGHT" => Ok(EdgeOp::Right),
            other => Err(format!("unknown edge op {other:?}")),
        }
    }
}

impl fmt::Display for EdgeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeOp::Child => "CHILD",
            EdgeOp::Head => "HEAD",
            EdgeOp::ImmRight => "IMM_RIGHT",
            EdgeOp::ImmLeft => "IMM_LEFT",
            EdgeOp::Right => "RIGHT",
        })
    }
}

/// Equivalent relation names across TIGER-style and UD annotation.
const DEPREL_EQUIVALENTS: &[&[&str]] = &[
    &["sb", "nsubj", "nsubj:pass"],
    &["oa", "obj"],
    &["da", "iobj"],
    &["app", "appos"],
    &["cj", "conj"],
    &["ROOT", "root"],
    &["svp", "compound:prt"],
];

/// A relation name plus its cross-scheme equivalents.
pub fn deprel_aliases(rel: &str) -> Vec<&str> {
    DEPREL_EQUIVALENTS
        .iter()
        .find(|group| group.contains(&rel))
        .map(|group| group.to_vec())
        .unwrap_or_else(|| vec![rel])
}

#[derive(Clone, Debug)]
pub struct NodeSpec {
    pub id: String,
    pub anchor: bool,
    pub form_regex: Option<Regex>,
    pub lemma_in: Option<HashSet<String>>,
    pub upos_in: Option<HashSet<String>>,
}

impl NodeSpec {
    pub fn accepts(&self, token: &Token) -> bool {
        if self.anchor && !is_first_person_plural(&token.form) {
            return false;
        }
        if let Some(re) = &self.form_regex {
            if !re.is_match(&token.form) {
                return false;
            }
        }
        if let Some(lemmas) = &self.lemma_in {
            if !lemmas.contains(token.lemma_or_form()) {
                return false;
            }
        }
        if let Some(tags) = &self.upos_in {
            if !tags.contains(&token.upos) {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug)]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    pub op: EdgeOp,
    /// Expanded with cross-scheme aliases at compile time.
    pub deprel_in: Option<HashSet<String>>,
}

impl EdgeSpec {
    pub fn deprel_ok(&self, rel: &str) -> bool {
        match &self.deprel_in {
            None => true,
            Some(set) => {
                set.contains(rel)
                    || rel
                        .split_once(':')
                        .is_some_and(|(base, _)| set.contains(base))
            }
        }
    }

    /// Whether sentence-local positions `(from, to)` satisfy the edge.
    pub fn holds(&self, tokens: &[Token], from: usize, to: usize) -> bool {
        match self.op {
            EdgeOp::Child => tokens[to].head == Some(from) && self.deprel_ok(&tokens[to].deprel),
            EdgeOp::Head => tokens[from].head == Some(to) && self.deprel_ok(&tokens[from].deprel),
            EdgeOp::ImmRight => to == from + 1,
            EdgeOp::ImmLeft => to + 1 == from,
            EdgeOp::Right => to > from,
        }
    }
}

/// One step of the matching plan: bind `node` through `edge`, whose other
/// end is already bound.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Step {
    pub node: usize,
    pub edge: usize,
    /// True when `node` is the edge's `to` end.
    pub node_is_to: bool,
}

#[derive(Clone, Debug)]
pub struct Pattern {
    pub name: String,
    pub label: RefClass,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
    pub anchor: usize,
    pub(crate) plan: Vec<Step>,
}

fn pattern_error(index: usize, name: &str, what: impl fmt::Display) -> Error {
    Error::Pattern {
        location: format!("pattern #{} ({name:?})", index + 1),
        message: what.to_string(),
    }
}

impl Pattern {
    /// Validates a raw pattern. `index` is its position in the source file,
    /// used in diagnostics.
    pub fn from_raw(raw: &RawPattern, index: usize) -> Result<Pattern> {
        let err = |what: String| pattern_error(index, &raw.name, what);
        if raw.nodes.is_empty() {
            return Err(err("pattern has no nodes".into()));
        }
        let anchors: Vec<usize> = raw
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.anchor)
            .map(|(i, _)| i)
            .collect();
        if anchors.len() != 1 {
            return Err(err(format!(
                "exactly one anchor node required, found {}",
                anchors.len()
            )));
        }
        let mut nodes = Vec::with_capacity(raw.nodes.len());
        for (j, n) in raw.nodes.iter().enumerate() {
            if raw.nodes[..j].iter().any(|m| m.id == n.id) {
                return Err(err(format!("node #{}: duplicate id {:?}", j + 1, n.id)));
            }
            let form_regex = n
                .form_regex
                .as_ref()
                .map(|re| {
                    Regex::new(&format!("^(?:{re})$")).map_err(|e| {
                        err(format!("node #{} ({:?}): invalid regex: {e}", j + 1, n.id))
                    })
                })
                .transpose()?;
            nodes.push(NodeSpec {
                id: n.id.clone(),
                anchor: n.anchor,
                form_regex,
                lemma_in: n.lemma_in.as_ref().map(|v| v.iter().cloned().collect()),
                upos_in: n.upos_in.as_ref().map(|v| v.iter().cloned().collect()),
            });
        }
        let node_index = |id: &str, j: usize| {
            raw.nodes
                .iter()
                .position(|n| n.id == id)
                .ok_or_else(|| err(format!("edge #{}: undeclared node {id:?}", j + 1)))
        };
        let mut edges = Vec::with_capacity(raw.edges.len());
        for (j, e) in raw.edges.iter().enumerate() {
            let op: EdgeOp =
                e.op.parse()
                    .map_err(|m: String| err(format!("edge #{}: {m}", j + 1)))?;
            let from = node_index(&e.from, j)?;
            let to = node_index(&e.to, j)?;
            if from == to {
                return Err(err(format!("edge #{}: self-loop on {:?}", j + 1, e.from)));
            }
            if e.deprel_in.is_some() && !matches!(op, EdgeOp::Child | EdgeOp::Head) {
                return Err(err(format!(
                    "edge #{}: deprel_in applies to CHILD/HEAD only, not {op}",
                    j + 1
                )));
            }
            let deprel_in = e.deprel_in.as_ref().map(|rels| {
                rels.iter()
                    .flat_map(|r| deprel_aliases(r))
                    .map(str::to_string)
                    .collect()
            });
            edges.push(EdgeSpec {
                from,
                to,
                op,
                deprel_in,
            });
        }
        // The edge graph must be a tree over the nodes (connected, acyclic).
        if edges.len() + 1 != nodes.len() {
            let what = if edges.len() + 1 > nodes.len() {
                "edge graph has a cycle"
            } else {
                "edge graph is disconnected"
            };
            return Err(err(format!(
                "{what}: {} nodes need exactly {} edges, found {}",
                nodes.len(),
                nodes.len() - 1,
                edges.len()
            )));
        }
        let anchor = anchors[0];
        let mut plan = Vec::with_capacity(edges.len());
        let mut bound = vec![false; nodes.len()];
        bound[anchor] = true;
        let mut queue = VecDeque::from([anchor]);
        let mut used = vec![false; edges.len()];
        while let Some(cur) = queue.pop_front() {
            for (k, e) in edges.iter().enumerate() {
                if used[k] {
                    continue;
                }
                let (other, node_is_to) = if e.from == cur {
                    (e.to, true)
                } else if e.to == cur {
                    (e.from, false)
                } else {
                    continue;
                };
                used[k] = true;
                if bound[other] {
                    return Err(err("edge graph has a cycle".into()));
                }
                bound[other] = true;
                plan.push(Step {
                    node: other,
                    edge: k,
                    node_is_to,
                });
                queue.push_back(other);
            }
        }
        if bound.iter().any(|b| !b) {
            return Err(err("edge graph is disconnected".into()));
        }
        Ok(Pattern {
            name: raw.name.clone(),
            label: raw.label,
            nodes,
            edges,
            anchor,
            plan,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct PatternSet {
    pub patterns: Vec<Pattern>,
}

impl PatternSet {
    pub fn new(patterns: Vec<Pattern>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, p) in patterns.iter().enumerate() {
            if !seen.insert(p.name.as_str()) {
                return Err(pattern_error(i, &p.name, "duplicate pattern name"));
            }
        }
        Ok(PatternSet { patterns })
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.patterns.iter().map(|p| p.name.clone()).collect()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Pattern> {
        self.patterns.iter()
    }
}

fn yaml_error(e: serde_yaml::Error) -> Error {
    let location = e
        .location()
        .map(|l| format!("line {}, column {}", l.line(), l.column()))
        .unwrap_or_else(|| "pattern file".into());
    Error::Pattern {
        location,
        message: e.to_string(),
    }
}

/// Compiles a pattern file: a YAML list of patterns.
pub fn compile_set(source: &str) -> Result<PatternSet> {
    let raw: Vec<RawPattern> = serde_yaml::from_str(source).map_err(yaml_error)?;
    let patterns = raw
        .iter()
        .enumerate()
        .map(|(i, r)| Pattern::from_raw(r, i))
        .collect::<Result<Vec<_>>>()?;
    PatternSet::new(patterns)
}

/// Compiles a single pattern given as one YAML mapping.
pub fn compile(source: &str) -> Result<Pattern> {
    let raw: RawPattern = serde_yaml::from_str(source).map_err(yaml_error)?;
    Pattern::from_raw(&raw, 0)
}
