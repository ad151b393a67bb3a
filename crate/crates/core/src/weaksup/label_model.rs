use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::LabelMatrix;
use super::silver::{argmax_class, SilverLabel, SilverSource};
use crate::annotation::{RefClass, NUM_CLASSES};
use crate::error::{Error, Result};

const FLOOR: f64 = 0.01;
const CEIL: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iter: 100,
            tol: 1e-6,
            seed: 42,
        }
    }
}

/// Fitted parameters of the label model. Each labeling function has one
/// accuracy and one propensity; wrong votes spread uniformly over the other
/// classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelModelParams {
    pub lfs: Vec<String>,
    pub priors: [f64; NUM_CLASSES],
    pub accuracy: Vec<f64>,
    pub propensity: Vec<f64>,
    pub log_likelihood_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub options: EmOptions,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Smallest-change projection of `weights` onto the probability simplex
/// with every entry at least `floor`: entries below the floor are raised to
/// it and the rest share the remaining mass in proportion.
fn floor_simplex(weights: &[f64; NUM_CLASSES], floor: f64) -> [f64; NUM_CLASSES] {
    let mut pinned = [false; NUM_CLASSES];
    loop {
        let free_mass: f64 = (0..NUM_CLASSES)
            .filter(|&k| !pinned[k])
            .map(|k| weights[k])
            .sum();
        let budget = 1.0 - floor * pinned.iter().filter(|&&p| p).count() as f64;
        let mut out = [floor; NUM_CLASSES];
        let mut changed = false;
        for k in 0..NUM_CLASSES {
            if pinned[k] {
                continue;
            }
            let v = if free_mass > 0.0 {
                weights[k] * budget / free_mass
            } else {
                budget / (NUM_CLASSES - pinned.iter().filter(|&&p| p).count()) as f64
            };
            if v < floor {
                pinned[k] = true;
                changed = true;
            }
            out[k] = v;
        }
        if !changed {
            return out;
        }
    }
}

fn log_sum_exp(xs: &[f64; NUM_CLASSES]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

impl LabelModelParams {
    /// Per-class log joint of a row's votes, without the propensity terms
    /// (which do not depend on the class).
    fn class_log_scores(&self, row: &[Option<RefClass>]) -> [f64; NUM_CLASSES] {
        let wrong = (NUM_CLASSES - 1) as f64;
        let mut s = [0.0; NUM_CLASSES];
        for (k, v) in s.iter_mut().enumerate() {
            *v = self.priors[k].ln();
        }
        for (j, vote) in row.iter().enumerate() {
            if let Some(c) = vote {
                let hit = self.accuracy[j].ln();
                let miss = ((1.0 - self.accuracy[j]) / wrong).ln();
                for (k, v) in s.iter_mut().enumerate() {
                    *v += if k == c.index() { hit } else { miss };
                }
            }
        }
        s
    }

    fn propensity_log(&self, row: &[Option<RefClass>]) -> f64 {
        row.iter()
            .zip(&self.propensity)
            .map(|(v, p)| if v.is_some() { p.ln() } else { (1.0 - p).ln() })
            .sum()
    }

    /// Posterior over classes for one row and its log marginal likelihood.
    pub fn posterior(&self, row: &[Option<RefClass>]) -> ([f64; NUM_CLASSES], f64) {
        let scores = self.class_log_scores(row);
        let z = log_sum_exp(&scores);
        let mut post = [0.0; NUM_CLASSES];
        for k in 0..NUM_CLASSES {
            post[k] = (scores[k] - z).exp();
        }
        let total: f64 = post.iter().sum();
        for p in &mut post {
            *p /= total;
        }
        (post, z + self.propensity_log(row))
    }

    pub fn log_likelihood(&self, matrix: &LabelMatrix) -> f64 {
        let (_, ll) = e_step(self, matrix);
        ll
    }
}

/// Posteriors for every row (computed in parallel, collected in row order)
/// and the total log-likelihood summed in row order.
fn e_step(params: &LabelModelParams, matrix: &LabelMatrix) -> (Vec<[f64; NUM_CLASSES]>, f64) {
    let per_row: Vec<([f64; NUM_CLASSES], f64)> = (0..matrix.num_rows())
        .into_par_iter()
        .map(|i| params.posterior(matrix.row(i)))
        .collect();
    let ll = per_row.iter().map(|(_, l)| l).sum();
    (per_row.into_iter().map(|(p, _)| p).collect(), ll)
}

fn m_step(params: &mut LabelModelParams, matrix: &LabelMatrix, posts: &[[f64; NUM_CLASSES]]) {
    let n = matrix.num_rows();
    let m = matrix.num_lfs();
    let mut mass = [0.0; NUM_CLASSES];
    let mut agree = vec![0.0; m];
    let mut fired = vec![0usize; m];
    for (i, post) in posts.iter().enumerate() {
        for k in 0..NUM_CLASSES {
            mass[k] += post[k];
        }
        for (j, v) in matrix.row(i).iter().enumerate() {
            if let Some(c) = v {
                agree[j] += post[c.index()];
                fired[j] += 1;
            }
        }
    }
    for v in &mut mass {
        *v /= n as f64;
    }
    params.priors = floor_simplex(&mass, FLOOR);
    for j in 0..m {
        if fired[j] > 0 {
            params.accuracy[j] = (agree[j] / fired[j] as f64).clamp(FLOOR, CEIL);
        }
        params.propensity[j] = (fired[j] as f64 / n as f64).clamp(FLOOR, CEIL);
    }
}

pub(crate) fn global_shares(matrix: &LabelMatrix) -> [f64; NUM_CLASSES] {
    let votes = matrix.class_votes();
    let total: usize = votes.iter().sum();
    if total == 0 {
        return [1.0 / NUM_CLASSES as f64; NUM_CLASSES];
    }
    votes.map(|v| v as f64 / total as f64)
}

/// Fits the label model by EM. The fit is deterministic; `options.seed` is
/// recorded for provenance only.
pub fn fit_label_model(matrix: &LabelMatrix, options: EmOptions) -> Result<LabelModelParams> {
    let m = matrix.num_lfs();
    if m < 2 {
        return Err(Error::InsufficientData(format!(
            "label model needs at least 2 labeling functions, got {m}"
        )));
    }
    if matrix.is_empty() {
        return Err(Error::InsufficientData("label matrix has no rows".into()));
    }
    let n = matrix.num_rows();
    let mut warnings = Vec::new();
    let coverage = matrix.coverage();
    for (j, &c) in coverage.iter().enumerate() {
        if c == 0 {
            warnings.push(format!(
                "labeling function {} never fires; propensity floored at {FLOOR}",
                matrix.lfs[j]
            ));
        }
    }

    // Initial accuracies: agreement with the majority-vote hard label.
    let mv = super::silver::majority_vote(matrix);
    let mut accuracy = vec![0.75; m];
    for (j, acc) in accuracy.iter_mut().enumerate() {
        if coverage[j] == 0 {
            continue;
        }
        let agree = (0..n)
            .filter(|&i| matrix.get(i, j) == Some(mv[i].hard_label))
            .count();
        *acc = (agree as f64 / coverage[j] as f64).clamp(0.55, 0.95);
    }
    let mut params = LabelModelParams {
        lfs: matrix.lfs.clone(),
        priors: floor_simplex(&global_shares(matrix), FLOOR),
        accuracy,
        propensity: coverage
            .iter()
            .map(|&c| (c as f64 / n as f64).clamp(FLOOR, CEIL))
            .collect(),
        log_likelihood_trace: Vec::new(),
        iterations: 0,
        converged: false,
        options,
        warnings: Vec::new(),
    };

    let (mut posts, mut ll) = e_step(&params, matrix);
    params.log_likelihood_trace.push(ll);
    for _ in 0..options.max_iter {
        m_step(&mut params, matrix, &posts);
        let (next_posts, next_ll) = e_step(&params, matrix);
        params.iterations += 1;
        params.log_likelihood_trace.push(next_ll);
        posts = next_posts;
        let gain = next_ll - ll;
        ll = next_ll;
        if gain < options.tol {
            params.converged = true;
            break;
        }
    }
    if !params.converged {
        warnings.push(format!(
            "EM stopped after {} iterations without converging",
            options.max_iter
        ));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    params.warnings = warnings;
    Ok(params)
}

/// Label-model posteriors and hard labels for every row. Ties between
/// classes go to the higher prior, then to canonical class order.
pub fn predict_silver(matrix: &LabelMatrix, params: &LabelModelParams) -> Result<Vec<SilverLabel>> {
    if params.accuracy.len() != matrix.num_lfs() {
        return Err(Error::DimensionMismatch {
            expected: params.accuracy.len(),
            actual: matrix.num_lfs(),
        });
    }
    let (posts, _) = e_step(params, matrix);
    Ok(posts
        .into_iter()
        .enumerate()
        .map(|(i, posterior)| SilverLabel {
            instance_id: matrix.rows[i].clone(),
            hard_label: argmax_class(&posterior, &params.priors),
            posterior,
            votes: matrix.votes(i),
            source: SilverSource::LabelModel,
        })
        .collect())
}

/// Label-model hard label for a single vote row.
pub fn label_votes(params: &LabelModelParams, row: &[Option<RefClass>]) -> RefClass {
    let (post, _) = params.posterior(row);
    argmax_class(&post, &params.priors)
}
