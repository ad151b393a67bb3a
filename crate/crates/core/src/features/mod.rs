//! Context n-gram and word-form features for pronoun instances.

mod vocab;

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::corpus::{context_window, Token};
use crate::dataset::Item;
use crate::error::{Error, Result};

pub use vocab::{
    chi2, fit_vocabulary, read_vocabulary, to_svmlight, transform, transform_all, FeatureVector,
    VocabEntry, Vocabulary,
};

pub const STOPWORDS_DE: &str = include_str!("../../data/stopwords_de.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_DE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Context tokens taken on each side of the pronoun.
    pub window: usize,
    pub use_unigrams: bool,
    pub use_bigrams: bool,
    pub use_trigrams: bool,
    pub tfidf: bool,
    pub lemmatise: bool,
    pub remove_stopwords: bool,
    pub select_k: usize,
    pub include_wordform: bool,
    pub include_ner: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window: 20,
            use_unigrams: true,
            use_bigrams: true,
            use_trigrams: false,
            tfidf: true,
            lemmatise: true,
            remove_stopwords: false,
            select_k: 300,
            include_wordform: true,
            include_ner: false,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.select_k == 0 {
            return Err(Error::Invalid("select_k must be at least 1".into()));
        }
        if self.include_ner {
            return Err(Error::Invalid(
                "named-entity features are not supported".into(),
            ));
        }
        Ok(())
    }

    fn orders(&self) -> Vec<usize> {
        [
            (1, self.use_unigrams),
            (2, self.use_bigrams),
            (3, self.use_trigrams),
        ]
        .into_iter()
        .filter_map(|(n, on)| on.then_some(n))
        .collect()
    }
}

fn side_terms(tokens: &[&Token], tag: &str, config: &FeatureConfig, out: &mut Vec<String>) {
    let words: Vec<&str> = tokens
        .iter()
        .filter(|t| {
            !config.remove_stopwords || !stopwords().contains(t.form.to_lowercase().as_str())
        })
        .map(|t| {
            if config.lemmatise {
                t.lemma_or_form()
            } else {
                t.form.as_str()
            }
        })
        .collect();
    for n in config.orders() {
        for gram in words.windows(n) {
            out.push(format!("{tag}:{}", gram.join(" ")));
        }
    }
}

/// Side-tagged context n-grams of one instance, with repetitions.
pub fn context_terms(item: &Item, config: &FeatureConfig) -> Vec<String> {
    let (left, right) =
        context_window(&item.segment, item.instance.flat_token_index, config.window);
    let mut out = Vec::new();
    side_terms(&left, "L", config, &mut out);
    side_terms(&right, "R", config, &mut out);
    out
}
