use std::collections::BTreeSet;

use serde::Serialize;

use super::{DropReason, DroppedColumn, SelectError};
use crate::frame::Frame;
use crate::par;

/// Symmetric Pearson matrix; `None` marks an undefined entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }

    pub fn get_by_name(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        self.values[i][j]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

pub fn pearson_matrix(frame: &Frame, columns: &[&str]) -> Result<CorrelationMatrix, SelectError> {
    pearson_matrix_with(frame, columns, 1)
}

/// Pearson r over pairwise-complete rows, computed with single-pass
/// co-moment updates. Entries are undefined with fewer than two complete
/// rows or when either side is constant over them.
pub fn pearson_matrix_with(frame: &Frame, columns: &[&str], workers: usize) -> Result<CorrelationMatrix, SelectError> {
    let mut data = Vec::with_capacity(columns.len());
    for &name in columns {
        let column = frame.require(name)?;
        if !column.kind().is_numeric() {
            return Err(SelectError::Kind {
                column: name.to_owned(),
                expected: "int or float",
                found: column.kind(),
            });
        }
        data.push(column.data.numeric().unwrap_or_default());
    }
    let n = columns.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let results = par::ordered_map(&pairs, workers, |&(i, j)| correlation(&data[i], &data[j]));
    let mut values = vec![vec![None; n]; n];
    for (&(i, j), r) in pairs.iter().zip(results) {
        let r = if i == j { r.map(|_| 1.0) } else { r };
        values[i][j] = r;
        values[j][i] = r;
    }
    Ok(CorrelationMatrix {
        labels: columns.iter().map(|c| (*c).to_owned()).collect(),
        values,
    })
}

fn correlation(x: &[Option<f64>], y: &[Option<f64>]) -> Option<f64> {
    let (mut n, mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0f64, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (Some(a), Some(b)) = (a, b) else { continue };
        n += 1.0;
        let dx = a - mx;
        let dy = b - my;
        mx += dx / n;
        my += dy / n;
        sxx += dx * (a - mx);
        syy += dy * (b - my);
        sxy += dx * (b - my);
    }
    if n < 2.0 || sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    r.is_finite().then(|| r.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelatedPair {
    pub left: String,
    pub right: String,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pruned {
    pub dropped: Vec<DroppedColumn>,
    pub kept: Vec<String>,
    /// Every defined pair with |r| ≥ threshold, in visiting order.
    pub pairs: Vec<CorrelatedPair>,
}

/// Greedy pruning: visit pairs with |r| ≥ threshold by descending |r|
/// (ties in lexicographic pair order); when both columns of a pair are
/// still present, drop the one with the larger mean |r| against the other
/// remaining columns, the lexicographically later name on a tie.
pub fn prune_by_correlation(matrix: &CorrelationMatrix, threshold: f64) -> Pruned {
    let n = matrix.len();
    let labels = &matrix.labels;
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if let Some(r) = matrix.get(i, j) {
                if r.abs() >= threshold {
                    let (a, b) = if labels[i] <= labels[j] { (i, j) } else { (j, i) };
                    pairs.push((a, b, r));
                }
            }
        }
    }
    pairs.sort_by(|x, y| {
        y.2.abs()
            .total_cmp(&x.2.abs())
            .then_with(|| labels[x.0].cmp(&labels[y.0]))
            .then_with(|| labels[x.1].cmp(&labels[y.1]))
    });
    let mut alive = vec![true; n];
    let mut dropped = Vec::new();
    for &(a, b, _) in &pairs {
        if !alive[a] || !alive[b] {
            continue;
        }
        let (ma, mb) = (mean_abs(matrix, a, &alive), mean_abs(matrix, b, &alive));
        let victim = if ma > mb {
            a
        } else if mb > ma {
            b
        } else if labels[a] > labels[b] {
            a
        } else {
            b
        };
        let partner = if victim == a { b } else { a };
        alive[victim] = false;
        dropped.push(DroppedColumn {
            column: labels[victim].clone(),
            reason: DropReason::CorrelatedWith(labels[partner].clone()),
        });
    }
    let kept: Vec<String> = (0..n).filter(|&i| alive[i]).map(|i| labels[i].clone()).collect();
    let pairs = pairs
        .into_iter()
        .map(|(a, b, r)| CorrelatedPair {
            left: labels[a].clone(),
            right: labels[b].clone(),
            r,
        })
        .collect();
    debug_assert_eq!(
        kept.iter().collect::<BTreeSet<_>>().len() + dropped.len(),
        n,
        "every column is kept or dropped once"
    );
    Pruned { dropped, kept, pairs }
}

fn mean_abs(matrix: &CorrelationMatrix, i: usize, alive: &[bool]) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for (j, &live) in alive.iter().enumerate() {
        if j == i || !live {
            continue;
        }
        if let Some(r) = matrix.get(i, j) {
            sum += r.abs();
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Column, ColumnData};

    fn frame(cols: Vec<(&str, Vec<f64>)>) -> Frame {
        Frame::from_columns(
            "f",
            cols.into_iter()
                .map(|(n, v)| Column::new(n, ColumnData::Float(v.into_iter().map(Some).collect())))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_and_negation() {
        let f = frame(vec![
            ("x", vec![1.0, 2.0, 4.0]),
            ("y", vec![-1.0, -2.0, -4.0]),
            ("c", vec![3.0; 3]),
        ]);
        let m = pearson_matrix(&f, &["x", "y", "c"]).unwrap();
        assert_eq!(m.get(0, 0), Some(1.0));
        assert!((m.get(0, 1).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(m.get(0, 2), None);
        assert_eq!(m.get(2, 2), None);
    }

    #[test]
    fn duplicate_pair_drops_later_name() {
        let f = frame(vec![("b", vec![1.0, 5.0, 2.0, 8.0]), ("a", vec![1.0, 5.0, 2.0, 8.0])]);
        let m = pearson_matrix(&f, &["b", "a"]).unwrap();
        let p = prune_by_correlation(&m, 0.9);
        assert_eq!(p.dropped.len(), 1);
        assert_eq!(p.dropped[0].column, "b");
        assert_eq!(p.kept, vec!["a"]);
    }

    #[test]
    fn nothing_above_threshold() {
        let f = frame(vec![("a", vec![1.0, 2.0, 3.0, 4.0]), ("b", vec![2.0, 1.0, 4.0, 3.0])]);
        let p = prune_by_correlation(&pearson_matrix(&f, &["a", "b"]).unwrap(), 0.9);
        assert!(p.dropped.is_empty());
    }

    #[test]
    fn pairwise_deletion() {
        let f = Frame::from_columns(
            "f",
            vec![
                Column::new("a", ColumnData::Int(vec![Some(1), Some(2), None, Some(4)])),
                Column::new(
                    "b",
                    ColumnData::Float(vec![Some(2.0), Some(4.0), Some(100.0), Some(8.0)]),
                ),
            ],
        )
        .unwrap();
        let m = pearson_matrix(&f, &["a", "b"]).unwrap();
        assert!((m.get(0, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn text_is_rejected() {
        let f = Frame::from_columns("f", vec![Column::new("t", ColumnData::Text(vec![Some("x".into())]))]).unwrap();
        assert!(matches!(pearson_matrix(&f, &["t"]), Err(SelectError::Kind { .. })));
    }
}
