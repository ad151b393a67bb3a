use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::annotation::{RefClass, NUM_CLASSES};
use crate::dataset::Item;
use crate::error::{Error, Result};
use crate::features::{transform, FeatureVector, Vocabulary};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearHyper {
    /// L2 regularization strength.
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for LinearHyper {
    fn default() -> Self {
        LinearHyper {
            lambda: 1e-4,
            epochs: 50,
            seed: 42,
        }
    }
}

impl LinearHyper {
    /// Offset of the step-size schedule `1 / (lambda * (t + t0))`, chosen
    /// so that the first step matches a typical weight scale of
    /// `sqrt(1 / sqrt(lambda))`.
    pub fn t0(&self) -> f64 {
        let typical = (1.0 / self.lambda.sqrt()).sqrt();
        1.0 / (typical * self.lambda)
    }
}

/// One-vs-rest linear classifier with hinge loss.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub version: u32,
    /// Trained classes in canonical order.
    pub classes: Vec<RefClass>,
    #[serde(skip)]
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub dim: usize,
    pub hyper: LinearHyper,
    /// Mean hinge loss plus regularization after each epoch, summed over classes.
    pub loss_trace: Vec<f64>,
}

type Sparse = Vec<(usize, f64)>;

/// Weight vector stored as `scale * v` so that the shrinkage step is O(1).
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
    bias: f64,
}

impl ScaledWeights {
    fn dot(&self, x: &Sparse) -> f64 {
        self.scale * x.iter().map(|&(i, w)| self.v[i] * w).sum::<f64>() + self.bias
    }

    fn weights(&self) -> Vec<f64> {
        self.v.iter().map(|w| w * self.scale).collect()
    }
}

fn sparse_rows(vectors: &[FeatureVector], dim: usize) -> Result<Vec<Sparse>> {
    vectors
        .iter()
        .map(|v| {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.dim(),
                });
            }
            Ok(v.nonzeros().collect())
        })
        .collect()
}

fn objective(
    states: &[ScaledWeights],
    classes: &[RefClass],
    rows: &[Sparse],
    labels: &[RefClass],
    lambda: f64,
) -> f64 {
    let mut total = 0.0;
    for (s, c) in states.iter().zip(classes) {
        let hinge: f64 = rows
            .iter()
            .zip(labels)
            .map(|(x, l)| {
                let y = if l == c { 1.0 } else { -1.0 };
                (1.0 - y * s.dot(x)).max(0.0)
            })
            .sum();
        let norm2: f64 = s.v.iter().map(|w| w * w).sum::<f64>() * s.scale * s.scale;
        total += hinge / rows.len() as f64 + 0.5 * lambda * norm2;
    }
    total
}

/// Stochastic subgradient descent, one binary problem per class present in
/// the labels. All classes see the same example order in every epoch.
pub fn fit_linear(
    vectors: &[FeatureVector],
    labels: &[RefClass],
    hyper: LinearHyper,
) -> Result<LinearModel> {
    if vectors.is_empty() {
        return Err(Error::InsufficientData(
            "linear model needs training data".into(),
        ));
    }
    if vectors.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: vectors.len(),
            actual: labels.len(),
        });
    }
    if hyper.lambda.is_nan() || hyper.lambda <= 0.0 {
        return Err(Error::Invalid(format!(
            "lambda must be positive, got {}",
            hyper.lambda
        )));
    }
    let dim = vectors[0].dim();
    let rows = sparse_rows(vectors, dim)?;
    let mut present = [false; NUM_CLASSES];
    for l in labels {
        present[l.index()] = true;
    }
    let classes: Vec<RefClass> = RefClass::ALL
        .into_iter()
        .filter(|c| present[c.index()])
        .collect();
    if classes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "training data has a single class ({}); a linear model would be degenerate",
            classes[0]
        )));
    }

    let lambda = hyper.lambda;
    let t0 = hyper.t0();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut states: Vec<ScaledWeights> = classes
        .iter()
        .map(|_| ScaledWeights {
            v: vec![0.0; dim],
            scale: 1.0,
            bias: 0.0,
        })
        .collect();
    let mut t = 0usize;
    let mut loss_trace = Vec::with_capacity(hyper.epochs);
    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let start = t;
        for (s, c) in states.iter_mut().zip(&classes) {
            t = start;
            for &i in &order {
                let x = &rows[i];
                let y = if labels[i] == *c { 1.0 } else { -1.0 };
                let eta = 1.0 / (lambda * (t as f64 + t0));
                let margin = y * s.dot(x);
                s.scale *= 1.0 - eta * lambda;
                if margin < 1.0 {
                    let step = eta * y / s.scale;
                    for &(j, w) in x {
                        s.v[j] += step * w;
                    }
                    s.bias += eta * y;
                }
                if s.scale < 1e-9 {
                    for w in &mut s.v {
                        *w *= s.scale;
                    }
                    s.scale = 1.0;
                }
                t += 1;
            }
        }
        loss_trace.push(objective(&states, &classes, &rows, labels, lambda));
    }
    Ok(LinearModel {
        version: MODEL_FORMAT_VERSION,
        classes,
        weights: states.iter().map(ScaledWeights::weights).collect(),
        bias: states.iter().map(|s| s.bias).collect(),
        dim,
        hyper,
        loss_trace,
    })
}

impl LinearModel {
    pub fn scores(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.dim(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| x.nonzeros().map(|(i, v)| w[i] * v).sum::<f64>() + b)
            .collect())
    }

    /// Highest-scoring class; ties go to the earlier class in canonical order.
    pub fn predict(&self, x: &FeatureVector) -> Result<RefClass> {
        let scores = self.scores(x)?;
        let mut best = 0;
        for k in 1..scores.len() {
            if scores[k] > scores[best] {
                best = k;
            }
        }
        Ok(self.classes[best])
    }

    /// Weight table: one row per feature column, one column per class.
    pub fn weights_tsv(&self, column_names: &[String]) -> String {
        let mut s = String::from("index\tfeature");
        for c in &self.classes {
            let _ = write!(s, "\t{c}");
        }
        s.push('\n');
        for i in 0..self.dim {
            let name = column_names.get(i).map_or("", String::as_str);
            let _ = write!(s, "{i}\t{name}");
            for w in &self.weights {
                let _ = write!(s, "\t{}", w[i]);
            }
            s.push('\n');
        }
        s
    }

    pub fn metadata_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model metadata serializes")
    }

    pub fn from_files(metadata_json: &str, weights_tsv: &str) -> Result<LinearModel> {
        let mut model: LinearModel =
            serde_json::from_str(metadata_json).map_err(|e| Error::Parse {
                context: "linear model metadata".into(),
                line: e.line(),
                message: e.to_string(),
            })?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported model format version {}",
                model.version
            )));
        }
        let k = model.classes.len();
        if model.bias.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: model.bias.len(),
            });
        }
        let mut weights = vec![Vec::with_capacity(model.dim); k];
        let mut lines = weights_tsv.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split('\t').collect();
        let named: Vec<&str> = model.classes.iter().map(|c| c.as_str()).collect();
        if header.len() != k + 2 || header[2..] != named[..] {
            return Err(Error::Invalid(
                "weight table columns do not match the model classes".into(),
            ));
        }
        for (n, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split('\t').collect();
            let parse_err = |message: String| Error::Parse {
                context: "linear model weights".into(),
                line: n + 2,
                message,
            };
            if cols.len() != k + 2 {
                return Err(parse_err(format!("expected {} columns", k + 2)));
            }
            for (c, cell) in cols[2..].iter().enumerate() {
                weights[c].push(cell.parse::<f64>().map_err(|e| parse_err(e.to_string()))?);
            }
        }
        if weights.iter().any(|w| w.len() != model.dim) {
            return Err(Error::DimensionMismatch {
                expected: model.dim,
                actual: weights.first().map_or(0, Vec::len),
            });
        }
        model.weights = weights;
        Ok(model)
    }
}

/// A fitted vocabulary together with the linear model over its features.
#[derive(Clone, Debug)]
pub struct LinearClassifier {
    pub vocab: Vocabulary,
    pub model: LinearModel,
}

impl Classifier for LinearClassifier {
    fn predict(&self, item: &Item) -> Option<RefClass> {
        let x = transform(item, &self.vocab);
        Some(
            self.model
                .predict(&x)
                .expect("vocabulary and model share one width"),
        )
    }
}
