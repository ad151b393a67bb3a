use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcaResult {
    /// Names of the columns that entered the decomposition.
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    /// Sample standard deviations when standardized.
    pub scales: Option<Vec<f64>>,
    /// Unit-norm directions, one per component, over `columns`.
    pub components: Vec<Vec<f64>>,
    /// Sample variances along each component, descending.
    pub eigenvalues: Vec<f64>,
    /// Components scaled by the square root of their eigenvalue.
    pub loadings: Vec<Vec<f64>>,
    /// Projections of the rows, one vector per row.
    pub scores: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Eigenvalues and column eigenvectors of a symmetric matrix by cyclic
/// Jacobi rotations.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale: f64 = m
        .iter()
        .flatten()
        .map(|x| x * x)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[i][i]).collect(), v)
}

/// Principal components of the rows of `data`. Columns are centered, and
/// divided by their sample standard deviation when `standardize` is set;
/// constant columns are then dropped. Each component's largest-magnitude
/// entry is made positive.
#[allow(clippy::needless_range_loop)]
pub fn pca(data: &[Vec<f64>], column_names: &[String], standardize: bool) -> Result<PcaResult> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "PCA needs at least 2 rows, got {n}"
        )));
    }
    let width = column_names.len();
    if let Some(row) = data.iter().find(|r| r.len() != width) {
        return Err(Error::DimensionMismatch {
            expected: width,
            actual: row.len(),
        });
    }
    let mean = |j: usize| data.iter().map(|r| r[j]).sum::<f64>() / n as f64;
    let sd = |j: usize, m: f64| {
        (data.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    let mut warnings = Vec::new();
    let mut keep = Vec::new();
    for (j, name) in column_names.iter().enumerate() {
        if standardize && sd(j, mean(j)) == 0.0 {
            warnings.push(format!("column {name} has zero variance and was dropped"));
            continue;
        }
        keep.push(j);
    }
    let varying = keep.iter().filter(|&&j| sd(j, mean(j)) > 0.0).count();
    if varying < 2 {
        return Err(Error::InsufficientData(format!(
            "PCA needs at least 2 columns with nonzero variance, got {varying}"
        )));
    }
    let means: Vec<f64> = keep.iter().map(|&j| mean(j)).collect();
    let scales: Option<Vec<f64>> =
        standardize.then(|| keep.iter().zip(&means).map(|(&j, &m)| sd(j, m)).collect());
    let x: Vec<Vec<f64>> = data
        .iter()
        .map(|r| {
            keep.iter()
                .enumerate()
                .map(|(c, &j)| {
                    let v = r[j] - means[c];
                    scales.as_ref().map_or(v, |s| v / s[c])
                })
                .collect()
        })
        .collect();
    let d = keep.len();
    let mut cov = vec![vec![0.0; d]; d];
    for row in &x {
        for a in 0..d {
            for b in a..d {
                cov[a][b] += row[a] * row[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            cov[a][b] /= (n - 1) as f64;
            cov[b][a] = cov[a][b];
        }
    }
    let (vals, vecs) = jacobi_eigen(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let mut components = Vec::with_capacity(d);
    let mut eigenvalues = Vec::with_capacity(d);
    for &k in &order {
        let mut comp: Vec<f64> = (0..d).map(|i| vecs[i][k]).collect();
        let mut big = 0;
        for i in 1..d {
            if comp[i].abs() > comp[big].abs() {
                big = i;
            }
        }
        if comp[big] < 0.0 {
            for c in &mut comp {
                *c = -*c;
            }
        }
        components.push(comp);
        eigenvalues.push(vals[k].max(0.0));
    }
    let total: f64 = (0..d).map(|i| cov[i][i]).sum();
    let explained_variance_ratio = eigenvalues.iter().map(|e| e / total).collect();
    let loadings = components
        .iter()
        .zip(&eigenvalues)
        .map(|(c, e)| c.iter().map(|v| v * e.sqrt()).collect())
        .collect();
    let scores = x
        .iter()
        .map(|row| {
            components
                .iter()
                .map(|c| row.iter().zip(c).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok(PcaResult {
        columns: keep.iter().map(|&j| column_names[j].clone()).collect(),
        means,
        scales,
        components,
        eigenvalues,
        loadings,
        scores,
        explained_variance_ratio,
        warnings,
    })
}

fn csv_table(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn pc_header(first: &str, k: usize) -> Vec<String> {
    std::iter::once(first.to_string())
        .chain((1..=k).map(|i| format!("PC{i}")))
        .collect()
}

impl PcaResult {
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    /// Maps component-space scores back to the input columns.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let d = self.columns.len();
        self.scores
            .iter()
            .map(|s| {
                (0..d)
                    .map(|j| {
                        let v: f64 = s.iter().zip(&self.components).map(|(a, c)| a * c[j]).sum();
                        let v = self.scales.as_ref().map_or(v, |sc| v * sc[j]);
                        v + self.means[j]
                    })
                    .collect()
            })
            .collect()
    }

    /// One row per column variable, one column per component.
    pub fn loadings_csv(&self) -> String {
        let k = self.num_components();
        csv_table(
            pc_header("variable", k),
            self.columns.iter().enumerate().map(|(j, name)| {
                std::iter::once(name.clone())
                    .chain(self.loadings.iter().map(|l| l[j].to_string()))
                    .collect()
            }),
        )
    }

    pub fn scores_csv(&self, row_labels: &[String]) -> String {
        csv_table(
            pc_header("group", self.num_components()),
            self.scores.iter().zip(row_labels).map(|(s, name)| {
                std::iter::once(name.clone())
                    .chain(s.iter().map(|v| v.to_string()))
                    .collect()
            }),
        )
    }

    pub fn eigenvalues_csv(&self) -> String {
        csv_table(
            vec![
                "component".into(),
                "eigenvalue".into(),
                "explained_variance_ratio".into(),
            ],
            self.eigenvalues
                .iter()
                .zip(&self.explained_variance_ratio)
                .enumerate()
                .map(|(i, (e, r))| vec![format!("PC{}", i + 1), e.to_string(), r.to_string()]),
        )
    }
}
