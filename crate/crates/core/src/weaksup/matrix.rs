use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::annotation::{RefClass, NUM_CLASSES};
use crate::corpus::{extract_instances, Segment};
use crate::depmatch::{match_all, PatternSet};
use crate::error::{Error, Result};

/// Labeling-function votes: one row per instance, one column per function,
/// `None` for an abstention.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabelMatrix {
    pub rows: Vec<String>,
    pub lfs: Vec<String>,
    cells: Vec<Option<RefClass>>,
    /// Instances left out because every function abstained on them.
    pub excluded: usize,
}

impl LabelMatrix {
    pub fn new(
        rows: Vec<String>,
        lfs: Vec<String>,
        cells: Vec<Vec<Option<RefClass>>>,
    ) -> Result<Self> {
        if cells.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                actual: cells.len(),
            });
        }
        let mut flat = Vec::with_capacity(rows.len() * lfs.len());
        for row in cells {
            if row.len() != lfs.len() {
                return Err(Error::DimensionMismatch {
                    expected: lfs.len(),
                    actual: row.len(),
                });
            }
            flat.extend(row);
        }
        Ok(LabelMatrix {
            rows,
            lfs,
            cells: flat,
            excluded: 0,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_lfs(&self) -> usize {
        self.lfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[Option<RefClass>] {
        let m = self.lfs.len();
        &self.cells[i * m..(i + 1) * m]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<RefClass> {
        self.row(i)[j]
    }

    /// Non-abstain votes of one row keyed by function name.
    pub fn votes(&self, i: usize) -> BTreeMap<String, RefClass> {
        self.row(i)
            .iter()
            .zip(&self.lfs)
            .filter_map(|(v, name)| v.map(|c| (name.clone(), c)))
            .collect()
    }

    /// Vote totals per class over the whole matrix.
    pub fn class_votes(&self) -> [usize; NUM_CLASSES] {
        let mut out = [0; NUM_CLASSES];
        for c in self.cells.iter().flatten() {
            out[c.index()] += 1;
        }
        out
    }

    /// Number of non-abstain votes per function.
    pub fn coverage(&self) -> Vec<usize> {
        let m = self.lfs.len();
        let mut out = vec![0; m];
        for (k, v) in self.cells.iter().enumerate() {
            if v.is_some() {
                out[k % m] += 1;
            }
        }
        out
    }

    /// Rows with votes of more than one class.
    pub fn conflicts(&self) -> usize {
        (0..self.num_rows())
            .filter(|&i| {
                let classes: BTreeSet<RefClass> = self.row(i).iter().flatten().copied().collect();
                classes.len() > 1
            })
            .count()
    }

    /// Reorders the function columns; `order[k]` is the old index of the new
    /// column `k`.
    pub fn permute_lfs(&self, order: &[usize]) -> LabelMatrix {
        let lfs = order.iter().map(|&j| self.lfs[j].clone()).collect();
        let cells = (0..self.num_rows())
            .map(|i| order.iter().map(|&j| self.get(i, j)).collect())
            .collect();
        let mut out = LabelMatrix::new(self.rows.clone(), lfs, cells).expect("same shape");
        out.excluded = self.excluded;
        out
    }

    /// Debug dump: one line per row, `-` for abstentions.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("instance_id");
        for lf in &self.lfs {
            s.push('\t');
            s.push_str(lf);
        }
        s.push('\n');
        for (i, id) in self.rows.iter().enumerate() {
            s.push_str(id);
            for v in self.row(i) {
                let _ = write!(s, "\t{}", v.map_or("-", |c| c.as_str()));
            }
            s.push('\n');
        }
        s
    }
}

/// Parses the TSV written by [`LabelMatrix::to_tsv`]. The excluded count
/// is not part of the file and comes back as zero.
pub fn read_matrix(tsv: &str) -> Result<LabelMatrix> {
    let mut lines = tsv.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split('\t').collect();
    if header.first() != Some(&"instance_id") {
        return Err(Error::Parse {
            context: "label matrix".into(),
            line: 1,
            message: "header must start with instance_id".into(),
        });
    }
    let lfs: Vec<String> = header[1..].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let parse_err = |message: String| Error::Parse {
            context: "label matrix".into(),
            line: n + 2,
            message,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != lfs.len() + 1 {
            return Err(parse_err(format!(
                "expected {} columns, found {}",
                lfs.len() + 1,
                cols.len()
            )));
        }
        rows.push(cols[0].to_string());
        cells.push(
            cols[1..]
                .iter()
                .map(|c| match *c {
                    "-" => Ok(None),
                    other => other
                        .parse::<RefClass>()
                        .map(Some)
                        .map_err(|e| parse_err(e.to_string())),
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    LabelMatrix::new(rows, lfs, cells)
}

/// Applies every pattern as a labeling function. Segments from documents in
/// `test_docs` must not be present.
pub fn build_matrix(
    patterns: &PatternSet,
    segments: &[Segment],
    test_docs: &BTreeSet<String>,
) -> Result<LabelMatrix> {
    let leaked: BTreeSet<&str> = segments
        .iter()
        .map(|s| s.doc_id.as_str())
        .filter(|d| test_docs.contains(*d))
        .collect();
    if !leaked.is_empty() {
        return Err(Error::Leakage(format!(
            "unlabeled corpus contains test documents: {}",
            leaked.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let instances = extract_instances(segments);
    let hits = match_all(patterns, segments);
    let col: BTreeMap<&str, usize> = patterns
        .iter()
        .enumerate()
        .map(|(j, p)| (p.name.as_str(), j))
        .collect();
    let mut by_instance: BTreeMap<&str, Vec<Option<RefClass>>> = BTreeMap::new();
    for m in &hits.matches {
        let row = by_instance
            .entry(m.instance_id.as_str())
            .or_insert_with(|| vec![None; patterns.len()]);
        row[col[m.pattern_name.as_str()]] = Some(m.label);
    }
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for inst in &instances {
        if let Some(row) = by_instance.remove(inst.instance_id.as_str()) {
            rows.push(inst.instance_id.clone());
            cells.push(row);
        }
    }
    let mut matrix = LabelMatrix::new(rows, patterns.names(), cells)?;
    matrix.excluded = instances.len() - matrix.num_rows();
    Ok(matrix)
}
