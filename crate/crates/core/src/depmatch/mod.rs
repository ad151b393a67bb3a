//! Declarative patterns over dependency trees, anchored at a
//! first-person-plural pronoun.
//!
//! A pattern is a small tree of node constraints joined by structural
//! edges. Tree edges (`CHILD`, `HEAD`) follow single arcs; positional edges
//! (`IMM_RIGHT`, `IMM_LEFT`, `RIGHT`) compare token positions. All bindings
//! of one match lie in the anchor's sentence and bind distinct tokens.

mod matcher;
mod pattern;

pub use matcher::{match_all, match_segment, HitTable, Match, PatternHits};
pub use pattern::{
    compile, compile_set, deprel_aliases, EdgeOp, EdgeSpec, NodeSpec, Pattern, PatternSet, RawEdge,
    RawNode, RawPattern,
};

/// The bundled pattern inventory, covering all nine classes.
pub const DEFAULT_PATTERNS: &str = include_str!("../../data/patterns.yaml");

pub fn default_patterns() -> PatternSet {
    compile_set(DEFAULT_PATTERNS).expect("bundled pattern inventory compiles")
}
