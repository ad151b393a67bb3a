//! Label matrices sampled from the label model itself, for checking that
//! fitting recovers the parameters it was generated from.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::LabelMatrix;
use crate::annotation::{RefClass, NUM_CLASSES};

#[derive(Clone, Debug, PartialEq)]
pub struct Planted {
    pub priors: [f64; NUM_CLASSES],
    pub accuracy: Vec<f64>,
    pub propensity: Vec<f64>,
}

impl Planted {
    /// Accuracies uniform in `acc_range`, propensities uniform in
    /// `prop_range`, priors proportional to uniform draws from [0.5, 1.5].
    pub fn draw(
        num_lfs: usize,
        acc_range: (f64, f64),
        prop_range: (f64, f64),
        rng: &mut impl Rng,
    ) -> Planted {
        let accuracy = (0..num_lfs)
            .map(|_| rng.random_range(acc_range.0..acc_range.1))
            .collect();
        let propensity = (0..num_lfs)
            .map(|_| rng.random_range(prop_range.0..prop_range.1))
            .collect();
        let mut priors = [0.0; NUM_CLASSES];
        for p in &mut priors {
            *p = rng.random_range(0.5..1.5);
        }
        let total: f64 = priors.iter().sum();
        for p in &mut priors {
            *p /= total;
        }
        Planted {
            priors,
            accuracy,
            propensity,
        }
    }
}

fn draw_class(weights: &[f64; NUM_CLASSES], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    NUM_CLASSES - 1
}

/// `n` rows from the generative model, with their true classes. Rows on
/// which every function abstains are kept.
pub fn sample_matrix(planted: &Planted, n: usize, seed: u64) -> (LabelMatrix, Vec<RefClass>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = planted.accuracy.len();
    let mut truth = Vec::with_capacity(n);
    let mut cells = Vec::with_capacity(n);
    for _ in 0..n {
        let y = draw_class(&planted.priors, &mut rng);
        let row = (0..m)
            .map(|j| {
                if rng.random::<f64>() >= planted.propensity[j] {
                    return None;
                }
                if rng.random::<f64>() < planted.accuracy[j] {
                    return Some(RefClass::ALL[y]);
                }
                let k = rng.random_range(0..NUM_CLASSES - 1);
                Some(RefClass::ALL[if k >= y { k + 1 } else { k }])
            })
            .collect();
        truth.push(RefClass::ALL[y]);
        cells.push(row);
    }
    let rows = (0..n).map(|i| format!("syn:0:{i}")).collect();
    let lfs = (0..m).map(|j| format!("lf{j}")).collect();
    let matrix = LabelMatrix::new(rows, lfs, cells).expect("consistent shape");
    (matrix, truth)
}

/// Fraction of `predicted` equal to `truth`.
pub fn accuracy(predicted: &[RefClass], truth: &[RefClass]) -> f64 {
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len().max(1) as f64
}

/// Whether `estimated` orders the functions exactly as `planted` does.
pub fn same_rank_order(planted: &[f64], estimated: &[f64]) -> bool {
    let order = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
        idx
    };
    order(planted) == order(estimated)
}
