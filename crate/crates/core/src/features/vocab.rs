use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{context_terms, FeatureConfig};
use crate::annotation::{RefClass, NUM_CLASSES};
use crate::corpus::{wordform_slot, WORDFORM_SLOTS};
use crate::dataset::Item;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub term: String,
    /// Training documents containing the term.
    pub df: usize,
    /// Largest one-vs-rest χ² over the classes.
    pub chi2: f64,
}

/// Selected n-gram columns, frozen after fitting.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    pub entries: Vec<VocabEntry>,
    pub n_docs: usize,
    pub config: FeatureConfig,
    index: HashMap<String, usize>,
    pub warnings: Vec<String>,
}

/// χ² statistic of a 2×2 presence table: `a` = in class with term,
/// `b` = other classes with term, `c` = in class without, `d` = others without.
pub fn chi2(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
    let n = a + b + c + d;
    let denom = (a + b) * (c + d) * (a + c) * (b + d);
    if denom == 0.0 {
        return 0.0;
    }
    let diff = a * d - b * c;
    n * diff * diff / denom
}

impl Vocabulary {
    fn new(
        entries: Vec<VocabEntry>,
        n_docs: usize,
        config: FeatureConfig,
        warnings: Vec<String>,
    ) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.term.clone(), i))
            .collect();
        Vocabulary {
            entries,
            n_docs,
            config,
            index,
            warnings,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Total feature width: n-gram columns plus the word-form block.
    pub fn dim(&self) -> usize {
        self.entries.len()
            + if self.config.include_wordform {
                WORDFORM_SLOTS
            } else {
                0
            }
    }

    /// Smoothed inverse document frequency of a column.
    pub fn idf(&self, column: usize) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.entries[column].df as f64)).ln() + 1.0
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("term\tindex\tdf\tchi2\n");
        for (i, e) in self.entries.iter().enumerate() {
            let _ = writeln!(s, "{}\t{i}\t{}\t{}", e.term, e.df, e.chi2);
        }
        s
    }
}

/// Rebuilds a vocabulary from its TSV dump.
pub fn read_vocabulary(tsv: &str, n_docs: usize, config: FeatureConfig) -> Result<Vocabulary> {
    let mut entries = Vec::new();
    for (i, line) in tsv.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            context: "vocabulary".into(),
            line: i + 1,
            message,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(err(format!("expected 4 columns, found {}", cols.len())));
        }
        let index: usize = cols[1].parse().map_err(|e| err(format!("index: {e}")))?;
        if index != entries.len() {
            return Err(err(format!("index {index} out of sequence")));
        }
        entries.push(VocabEntry {
            term: cols[0].to_string(),
            df: cols[2].parse().map_err(|e| err(format!("df: {e}")))?,
            chi2: cols[3].parse().map_err(|e| err(format!("chi2: {e}")))?,
        });
    }
    Ok(Vocabulary::new(entries, n_docs, config, Vec::new()))
}

/// Fits the vocabulary on labeled training items: every side-tagged n-gram
/// is scored by its largest one-vs-rest χ² over term presence, and the
/// `select_k` best are kept (ties by term). Columns are in term order.
pub fn fit_vocabulary(
    items: &[Item],
    labels: &[RefClass],
    config: &FeatureConfig,
) -> Result<Vocabulary> {
    config.validate()?;
    if items.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: items.len(),
            actual: labels.len(),
        });
    }
    if items.is_empty() {
        return Err(Error::InsufficientData(
            "no training instances for the vocabulary".into(),
        ));
    }
    let docs: Vec<BTreeSet<String>> = items
        .par_iter()
        .map(|it| context_terms(it, config).into_iter().collect())
        .collect();
    let mut class_size = [0usize; NUM_CLASSES];
    for l in labels {
        class_size[l.index()] += 1;
    }
    // term -> (df, per-class presence counts)
    let mut stats: BTreeMap<&str, (usize, [usize; NUM_CLASSES])> = BTreeMap::new();
    for (doc, label) in docs.iter().zip(labels) {
        for term in doc {
            let e = stats.entry(term.as_str()).or_insert((0, [0; NUM_CLASSES]));
            e.0 += 1;
            e.1[label.index()] += 1;
        }
    }
    let n = items.len();
    let mut scored: Vec<VocabEntry> = stats
        .into_iter()
        .map(|(term, (df, present))| {
            let best = (0..NUM_CLASSES)
                .map(|k| {
                    let a = present[k];
                    let b = df - a;
                    let c = class_size[k] - a;
                    let d = n - df - c;
                    chi2(a, b, c, d)
                })
                .fold(0.0, f64::max);
            VocabEntry {
                term: term.to_string(),
                df,
                chi2: best,
            }
        })
        .collect();
    let mut warnings = Vec::new();
    if scored.len() < config.select_k {
        let w = format!(
            "only {} distinct terms, fewer than select_k = {}; keeping all",
            scored.len(),
            config.select_k
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    scored.sort_by(|x, y| y.chi2.total_cmp(&x.chi2).then_with(|| x.term.cmp(&y.term)));
    scored.truncate(config.select_k);
    scored.sort_by(|x, y| x.term.cmp(&y.term));
    Ok(Vocabulary::new(scored, n, config.clone(), warnings))
}

/// Sparse n-gram weights plus the dense word-form indicator block.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    /// `(column, weight)` sorted by column.
    pub ngrams: Vec<(usize, f64)>,
    pub wordform: Vec<f64>,
    /// Width of the n-gram block; the word-form block starts here.
    pub vocab_len: usize,
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.vocab_len + self.wordform.len()
    }

    /// All nonzero entries over the full feature width.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let offset = self.vocab_len;
        self.ngrams.iter().copied().chain(
            self.wordform
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(move |(i, v)| (offset + i, *v)),
        )
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (i, v) in self.nonzeros() {
            out[i] = v;
        }
        out
    }

    pub fn scale(&self, factor: f64) -> FeatureVector {
        FeatureVector {
            ngrams: self.ngrams.iter().map(|&(i, v)| (i, v * factor)).collect(),
            wordform: self.wordform.iter().map(|v| v * factor).collect(),
            vocab_len: self.vocab_len,
        }
    }
}

pub fn transform(item: &Item, vocab: &Vocabulary) -> FeatureVector {
    let config = &vocab.config;
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for term in context_terms(item, config) {
        if let Some(col) = vocab.column(&term) {
            *counts.entry(col).or_insert(0.0) += 1.0;
        }
    }
    let mut ngrams: Vec<(usize, f64)> = counts
        .into_iter()
        .map(|(col, tf)| {
            (
                col,
                if config.tfidf {
                    tf * vocab.idf(col)
                } else {
                    tf
                },
            )
        })
        .collect();
    if config.tfidf {
        let norm = ngrams.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut ngrams {
                *v /= norm;
            }
        }
    }
    let mut wordform = Vec::new();
    if config.include_wordform {
        wordform = vec![0.0; WORDFORM_SLOTS];
        if let Some(slot) = wordform_slot(item.form()) {
            wordform[slot] = 1.0;
        }
    }
    FeatureVector {
        ngrams,
        wordform,
        vocab_len: vocab.len(),
    }
}

pub fn transform_all(items: &[Item], vocab: &Vocabulary) -> Vec<FeatureVector> {
    items.par_iter().map(|it| transform(it, vocab)).collect()
}

/// svmlight-style lines: class number (canonical index + 1, or 0 when
/// unlabeled), 1-based `column:value` pairs, and the instance id as a comment.
pub fn to_svmlight(
    items: &[Item],
    vectors: &[FeatureVector],
    labels: Option<&[RefClass]>,
) -> String {
    let mut s = String::new();
    for (i, (item, v)) in items.iter().zip(vectors).enumerate() {
        let class = labels.map_or(0, |l| l[i].index() + 1);
        let _ = write!(s, "{class}");
        for (col, w) in v.nonzeros() {
            let _ = write!(s, " {}:{w}", col + 1);
        }
        let _ = writeln!(s, " # {}", item.id());
    }
    s
}
