//! Krippendorff's nominal alpha computed straight from the pairing
//! definition, by listing every ordered pair of values.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `None` when no unit has two values or all pairable values are equal.
pub fn alpha(units: &[Vec<usize>]) -> Option<f64> {
    let pairable: Vec<&Vec<usize>> = units.iter().filter(|u| u.len() >= 2).collect();
    let mut disagree_within = 0.0;
    let mut n = 0.0;
    for u in &pairable {
        let m = u.len() as f64;
        n += m;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j && u[i] != u[j] {
                    disagree_within += 1.0 / (m - 1.0);
                }
            }
        }
    }
    if n < 2.0 {
        return None;
    }
    let all: Vec<usize> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
    let mut disagree_any = 0usize;
    for i in 0..all.len() {
        for j in 0..all.len() {
            if i != j && all[i] != all[j] {
                disagree_any += 1;
            }
        }
    }
    if disagree_any == 0 {
        return None;
    }
    let observed = disagree_within / n;
    let expected = disagree_any as f64 / (n * (n - 1.0));
    Some(1.0 - observed / expected)
}

/// Up to 6 items, up to 3 classes, 2 or 3 annotators, each of whom may
/// skip an item. Returns `(item, annotator, class)` triples.
pub fn random_case(rng: &mut ChaCha8Rng) -> Vec<(usize, usize, usize)> {
    let items = rng.random_range(1..=6);
    let classes = rng.random_range(1..=3);
    let annotators = rng.random_range(2..=3);
    let mut out = Vec::new();
    for i in 0..items {
        for a in 0..annotators {
            if rng.random_bool(0.85) {
                out.push((i, a, rng.random_range(0..classes)));
            }
        }
    }
    out
}

pub fn units(case: &[(usize, usize, usize)]) -> Vec<Vec<usize>> {
    let items = case.iter().map(|c| c.0 + 1).max().unwrap_or(0);
    let mut units = vec![Vec::new(); items];
    for &(i, _, c) in case {
        units[i].push(c);
    }
    units
}
