//! Toy corpus plus a from-scratch χ² / tf-idf recomputation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wirref_core::corpus::{Party, PronounInstance};
use wirref_core::dataset::Item;
use wirref_core::{RefClass, Segment, Sentence, Token};

pub struct ToyDoc {
    pub left: Vec<(String, String)>,
    pub right: Vec<(String, String)>,
    pub label: RefClass,
}

/// `n` documents over a small vocabulary; lemmas are the uppercased forms
/// so that lemma and surface runs differ.
pub fn toy_corpus(n: usize, seed: u64) -> Vec<ToyDoc> {
    let words = [
        "haus", "land", "geld", "wir", "recht", "zeit", "volk", "plan",
    ];
    let classes = [RefClass::Party, RefClass::Govern, RefClass::Country];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = |rng: &mut ChaCha8Rng| {
        let len = rng.random_range(0..7);
        (0..len)
            .map(|_| {
                // "wir" stays out of the context so the pronoun position is unique
                let w = words[rng.random_range(0..words.len())];
                let w = if w == "wir" { "und" } else { w };
                (w.to_string(), w.to_uppercase())
            })
            .collect::<Vec<_>>()
    };
    (0..n)
        .map(|_| {
            let left = side(&mut rng);
            let right = side(&mut rng);
            ToyDoc {
                left,
                right,
                label: classes[rng.random_range(0..classes.len())],
            }
        })
        .collect()
}

pub fn to_items(docs: &[ToyDoc]) -> (Vec<Item>, Vec<RefClass>) {
    let mut items = Vec::new();
    for (i, d) in docs.iter().enumerate() {
        let mut rows: Vec<(String, String)> = d.left.clone();
        rows.push(("wir".into(), "wir".into()));
        rows.extend(d.right.iter().cloned());
        let pos = d.left.len();
        let tokens = rows
            .into_iter()
            .enumerate()
            .map(|(k, (form, lemma))| Token {
                index: k,
                form,
                lemma,
                upos: "X".into(),
                head: if k == pos { None } else { Some(pos) },
                deprel: "dep".into(),
            })
            .collect();
        let seg = Segment {
            doc_id: "toy".into(),
            segment_index: i,
            sentences: vec![Sentence::new(tokens)],
            speaker: "s".into(),
            party: Party::Other,
            date: None,
        };
        items.push(Item {
            instance: PronounInstance::new("toy", i, pos, "wir"),
            segment: Arc::new(seg),
        });
    }
    (items, docs.iter().map(|d| d.label).collect())
}

pub struct Settings {
    pub window: usize,
    pub orders: Vec<usize>,
    pub lemmas: bool,
}

pub fn terms(doc: &ToyDoc, s: &Settings) -> Vec<String> {
    let pick = |t: &(String, String)| if s.lemmas { t.1.clone() } else { t.0.clone() };
    let left: Vec<String> = doc.left[doc.left.len().saturating_sub(s.window)..]
        .iter()
        .map(pick)
        .collect();
    let right: Vec<String> = doc.right[..doc.right.len().min(s.window)]
        .iter()
        .map(pick)
        .collect();
    let mut out = Vec::new();
    for (tag, words) in [("L", &left), ("R", &right)] {
        for &n in &s.orders {
            if words.len() < n {
                continue;
            }
            for i in 0..=words.len() - n {
                out.push(format!("{tag}:{}", words[i..i + n].join(" ")));
            }
        }
    }
    out
}

/// Pearson χ² of the 2×2 presence table via observed/expected cells.
fn pearson(table: [[f64; 2]; 2]) -> f64 {
    let n: f64 = table.iter().flatten().sum();
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    if rows.contains(&0.0) || cols.contains(&0.0) {
        return 0.0;
    }
    let mut x = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let e = rows[r] * cols[c] / n;
            x += (table[r][c] - e).powi(2) / e;
        }
    }
    x
}

/// Max-over-classes χ² for every term, counting documents one by one.
pub fn chi2_scores(docs: &[ToyDoc], s: &Settings) -> BTreeMap<String, f64> {
    let sets: Vec<BTreeSet<String>> = docs
        .iter()
        .map(|d| terms(d, s).into_iter().collect())
        .collect();
    let all: BTreeSet<&String> = sets.iter().flatten().collect();
    let mut out = BTreeMap::new();
    for term in all {
        let mut best: f64 = 0.0;
        for class in RefClass::ALL {
            let mut table = [[0.0; 2]; 2];
            for (set, d) in sets.iter().zip(docs) {
                let r = usize::from(d.label != class);
                let c = usize::from(!set.contains(term));
                table[r][c] += 1.0;
            }
            best = best.max(pearson(table));
        }
        out.insert(term.clone(), best);
    }
    out
}

/// The `k` best terms by score, ties by term.
pub fn select(scores: &BTreeMap<String, f64>, k: usize) -> BTreeSet<String> {
    let mut v: Vec<(&String, f64)> = scores.iter().map(|(t, s)| (t, *s)).collect();
    v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
    v.into_iter().take(k).map(|(t, _)| t.clone()).collect()
}

/// L2-normalized tf-idf weights of one document over `selected`.
pub fn tfidf(
    doc: &ToyDoc,
    docs: &[ToyDoc],
    selected: &BTreeSet<String>,
    s: &Settings,
) -> BTreeMap<String, f64> {
    let n = docs.len() as f64;
    let mut w = BTreeMap::new();
    for t in terms(doc, s) {
        if selected.contains(&t) {
            *w.entry(t).or_insert(0.0) += 1.0;
        }
    }
    for (t, v) in w.iter_mut() {
        let df = docs.iter().filter(|d| terms(d, s).contains(t)).count() as f64;
        *v *= ((1.0 + n) / (1.0 + df)).ln() + 1.0;
    }
    let norm = w.values().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in w.values_mut() {
            *v /= norm;
        }
    }
    w
}
