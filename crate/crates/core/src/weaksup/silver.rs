use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::label_model::global_shares;
use super::matrix::LabelMatrix;
use crate::annotation::{RefClass, NUM_CLASSES};
use crate::corpus::{context_window, SegmentIndex};
use crate::dataset::resolve;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SilverSource {
    Majority,
    LabelModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SilverLabel {
    pub instance_id: String,
    pub hard_label: RefClass,
    pub posterior: [f64; NUM_CLASSES],
    pub votes: BTreeMap<String, RefClass>,
    pub source: SilverSource,
}

/// Index of the largest score. Exact ties go to the larger `tie_break`
/// value, then to the earlier class.
pub fn argmax_class(scores: &[f64; NUM_CLASSES], tie_break: &[f64; NUM_CLASSES]) -> RefClass {
    let mut best = 0;
    for k in 1..NUM_CLASSES {
        if scores[k] > scores[best] || (scores[k] == scores[best] && tie_break[k] > tie_break[best])
        {
            best = k;
        }
    }
    RefClass::ALL[best]
}

/// Plurality vote per row with vote-share posteriors. Ties go to the class
/// with more votes over the whole matrix, then to canonical order.
pub fn majority_vote(matrix: &LabelMatrix) -> Vec<SilverLabel> {
    let shares = global_shares(matrix);
    (0..matrix.num_rows())
        .map(|i| {
            let mut counts = [0.0; NUM_CLASSES];
            for c in matrix.row(i).iter().flatten() {
                counts[c.index()] += 1.0;
            }
            let total: f64 = counts.iter().sum();
            let posterior = if total > 0.0 {
                counts.map(|c| c / total)
            } else {
                shares
            };
            SilverLabel {
                instance_id: matrix.rows[i].clone(),
                hard_label: argmax_class(&posterior, &shares),
                posterior,
                votes: matrix.votes(i),
                source: SilverSource::Majority,
            }
        })
        .collect()
}

pub fn write_silver<W: Write>(labels: &[SilverLabel], mut out: W) -> std::io::Result<()> {
    for l in labels {
        serde_json::to_writer(&mut out, l)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_silver(text: &str) -> Result<Vec<SilverLabel>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let label: SilverLabel = serde_json::from_str(line).map_err(|e| Error::Parse {
            context: "silver".into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        let sum: f64 = label.posterior.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Parse {
                context: "silver".into(),
                line: i + 1,
                message: format!("posterior sums to {sum}"),
            });
        }
        out.push(label);
    }
    Ok(out)
}

/// Positions of `labels` grouped by hard label, in input order.
fn by_class(labels: &[SilverLabel]) -> [Vec<usize>; NUM_CLASSES] {
    let mut out: [Vec<usize>; NUM_CLASSES] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        out[l.hard_label.index()].push(i);
    }
    out
}

/// Per class, a uniform sample of positions of size `min(cap, available)`;
/// classes are visited in canonical order with one generator.
fn sample_per_class(labels: &[SilverLabel], cap: usize, seed: u64) -> [Vec<usize>; NUM_CLASSES] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    by_class(labels).map(|members| {
        if members.len() <= cap {
            return members;
        }
        let mut picked: Vec<usize> = sample(&mut rng, members.len(), cap)
            .into_iter()
            .map(|k| members[k])
            .collect();
        picked.sort_unstable();
        picked
    })
}

/// At most `cap` labels per hard-label class, chosen uniformly. The result
/// keeps the input order.
pub fn downsample(labels: &[SilverLabel], cap: usize, seed: u64) -> Vec<SilverLabel> {
    let mut keep: Vec<usize> = sample_per_class(labels, cap, seed)
        .into_iter()
        .flatten()
        .collect();
    keep.sort_unstable();
    keep.into_iter().map(|i| labels[i].clone()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReviewRow {
    pub label: RefClass,
    pub instance_id: String,
    pub confidence: f64,
    pub votes: String,
    pub left: String,
    pub pronoun: String,
    pub right: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReviewSheet {
    pub rows: Vec<ReviewRow>,
}

impl ReviewSheet {
    pub fn count(&self, class: RefClass) -> usize {
        self.rows.iter().filter(|r| r.label == class).count()
    }

    /// Tab-separated with an empty `correct` column for the reviewer.
    pub fn to_tsv(&self) -> String {
        let clean = |s: &str| s.replace(['\t', '\n'], " ");
        let mut s = String::from("label\tinstance_id\tconfidence\tvotes\tcontext\tcorrect\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}\t{}\t{:.3}\t{}\t{} [[{}]] {}\t",
                r.label,
                r.instance_id,
                r.confidence,
                clean(&r.votes),
                clean(&r.left),
                clean(&r.pronoun),
                clean(&r.right)
            );
        }
        s
    }
}

/// Up to `n_per_class` random silver labels per class, each shown with
/// `window` tokens of context on either side.
pub fn sample_for_review(
    labels: &[SilverLabel],
    corpus: &SegmentIndex,
    n_per_class: usize,
    seed: u64,
    window: usize,
) -> Result<ReviewSheet> {
    let mut rows = Vec::new();
    for members in sample_per_class(labels, n_per_class, seed) {
        for i in members {
            let l = &labels[i];
            let item = resolve(corpus, &l.instance_id)?;
            let (left, right) =
                context_window(&item.segment, item.instance.flat_token_index, window);
            let join = |ts: Vec<&crate::corpus::Token>| {
                ts.iter()
                    .map(|t| t.form.as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            rows.push(ReviewRow {
                label: l.hard_label,
                instance_id: l.instance_id.clone(),
                confidence: l.posterior[l.hard_label.index()],
                votes: l
                    .votes
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(","),
                left: join(left),
                pronoun: item.instance.form.clone(),
                right: join(right),
            });
        }
    }
    Ok(ReviewSheet { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_util::flat_segment;
    use RefClass::*;

    fn matrix(rows: &[&[Option<RefClass>]]) -> LabelMatrix {
        let ids = (0..rows.len()).map(|i| format!("r{i}")).collect();
        let lfs = (0..rows[0].len()).map(|j| format!("lf{j}")).collect();
        LabelMatrix::new(ids, lfs, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn plurality_and_shares() {
        let m = matrix(&[
            &[Some(Party), Some(Party), Some(Govern)],
            &[Some(Country), None, None],
        ]);
        let mv = majority_vote(&m);
        assert_eq!(mv[0].hard_label, Party);
        assert!((mv[0].posterior[Party.index()] - 2.0 / 3.0).abs() < 1e-15);
        assert!((mv[0].posterior[Govern.index()] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mv[1].hard_label, Country);
        assert_eq!(mv[1].posterior[Country.index()], 1.0);
        assert_eq!(mv[0].votes.len(), 3);
    }

    #[test]
    fn ties_use_corpus_vote_shares_then_order() {
        let m = matrix(&[&[Some(Party), Some(Parl)], &[Some(Parl), None]]);
        assert_eq!(majority_vote(&m)[0].hard_label, Parl);
        let even = matrix(&[&[Some(Party), Some(Parl)]]);
        assert_eq!(majority_vote(&even)[0].hard_label, Parl);
        let even = matrix(&[&[Some(Union), Some(Board)]]);
        assert_eq!(majority_vote(&even)[0].hard_label, Board);
    }

    fn silver(classes: &[(RefClass, usize)]) -> Vec<SilverLabel> {
        let mut out = Vec::new();
        for &(c, n) in classes {
            for _ in 0..n {
                let mut posterior = [0.0; NUM_CLASSES];
                posterior[c.index()] = 1.0;
                out.push(SilverLabel {
                    instance_id: format!("d:0:{}", out.len()),
                    hard_label: c,
                    posterior,
                    votes: BTreeMap::new(),
                    source: SilverSource::Majority,
                });
            }
        }
        out
    }

    #[test]
    fn downsample_caps_per_class() {
        let s = silver(&[(Board, 12), (Country, 8795)]);
        let d = downsample(&s, 300, 42);
        assert_eq!(d.iter().filter(|l| l.hard_label == Board).count(), 12);
        assert_eq!(d.iter().filter(|l| l.hard_label == Country).count(), 300);
        assert_eq!(d, downsample(&s, 300, 42));
        assert_ne!(d, downsample(&s, 300, 43));
        assert!(downsample(&s, 0, 1).is_empty());
    }

    #[test]
    fn review_sheet_sizes() {
        let text = (0..400).map(|_| "wir").collect::<Vec<_>>().join(" ");
        let corpus = SegmentIndex::new(vec![flat_segment("d", 0, &text)]);
        let s = silver(&[(Board, 7), (Generic, 307)]);
        let sheet = sample_for_review(&s, &corpus, 25, 42, 3).unwrap();
        assert_eq!(sheet.count(Board), 7);
        assert_eq!(sheet.count(Generic), 25);
        assert_eq!(sheet, sample_for_review(&s, &corpus, 25, 42, 3).unwrap());
        let tsv = sheet.to_tsv();
        assert_eq!(tsv.lines().count(), 33);
        assert!(tsv
            .lines()
            .skip(1)
            .any(|l| l.contains("\twir wir wir [[wir]] wir wir wir\t")));
    }

    #[test]
    fn silver_round_trip() {
        let m = matrix(&[&[Some(Party), Some(Govern)]]);
        let mv = majority_vote(&m);
        let mut buf = Vec::new();
        write_silver(&mv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"source\":\"MAJORITY\""));
        assert!(text.contains("\"votes\":{\"lf0\":\"PARTY\",\"lf1\":\"GOVERN\"}"));
        assert_eq!(read_silver(&text).unwrap(), mv);
    }
}
