use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::gamma::chi_square_sf;
use super::SelectError;
use crate::frame::Frame;

/// How features are selected from their chi-square p-values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChiMode {
    /// The `k` features with the smallest p-values.
    NumTopFeatures(usize),
    /// The top ⌈fraction · m⌉ features.
    Percentile(f64),
    /// Features with p < alpha.
    Fpr(f64),
    /// Benjamini–Hochberg step-up at level q.
    Fdr(f64),
}

impl ChiMode {
    pub fn validate(&self) -> Result<(), SelectError> {
        let ok = match *self {
            ChiMode::NumTopFeatures(_) => true,
            ChiMode::Percentile(f) => f > 0.0 && f <= 1.0,
            ChiMode::Fpr(a) | ChiMode::Fdr(a) => a > 0.0 && a <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(SelectError::InvalidMode(format!("parameter out of range in `{self}`")))
        }
    }
}

impl fmt::Display for ChiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChiMode::NumTopFeatures(k) => write!(f, "numTopFeatures={k}"),
            ChiMode::Percentile(p) => write!(f, "percentile={p}"),
            ChiMode::Fpr(a) => write!(f, "fpr={a}"),
            ChiMode::Fdr(q) => write!(f, "fdr={q}"),
        }
    }
}

impl FromStr for ChiMode {
    type Err = SelectError;

    /// `numTopFeatures=<k>`, `percentile=<fraction>`, `fpr=<alpha>` or `fdr=<q>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || {
            SelectError::InvalidMode(format!(
                "`{s}` (expected numTopFeatures=k, percentile=f, fpr=a or fdr=q)"
            ))
        };
        let (mode, param) = s.split_once('=').ok_or_else(invalid)?;
        let float = || param.trim().parse::<f64>().map_err(|_| invalid());
        let parsed = match mode.trim() {
            "numTopFeatures" => ChiMode::NumTopFeatures(param.trim().parse().map_err(|_| invalid())?),
            "percentile" => ChiMode::Percentile(float()?),
            "fpr" => ChiMode::Fpr(float()?),
            "fdr" => ChiMode::Fdr(float()?),
            _ => return Err(invalid()),
        };
        parsed.validate()?;
        Ok(parsed)
    }
}

impl Serialize for ChiMode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ChiMode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub feature: String,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub label: String,
    pub mode: ChiMode,
    pub tests: Vec<ChiSquareTest>,
    /// Selected features, smallest p-value first.
    pub selected: Vec<String>,
}

/// Pearson chi-square statistic, degrees of freedom and upper-tail p-value
/// of a contingency table. Empty rows and columns are ignored; a table with
/// fewer than two non-empty rows or columns yields `(0, 0, 1)`.
pub fn chi_square_table(table: &[Vec<f64>]) -> (f64, usize, f64) {
    let cols = table.iter().map(Vec::len).max().unwrap_or(0);
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r.get(j).copied().unwrap_or(0.0)).sum())
        .collect();
    let total: f64 = row_sums.iter().sum();
    let live_rows: Vec<usize> = (0..table.len()).filter(|&i| row_sums[i] > 0.0).collect();
    let live_cols: Vec<usize> = (0..cols).filter(|&j| col_sums[j] > 0.0).collect();
    if live_rows.len() < 2 || live_cols.len() < 2 {
        return (0.0, 0, 1.0);
    }
    let mut statistic = 0.0;
    for &i in &live_rows {
        for &j in &live_cols {
            let expected = row_sums[i] * col_sums[j] / total;
            let observed = table[i].get(j).copied().unwrap_or(0.0);
            statistic += (observed - expected).powi(2) / expected;
        }
    }
    let dof = (live_rows.len() - 1) * (live_cols.len() - 1);
    (statistic, dof, chi_square_sf(statistic, dof as f64))
}

/// Tests every feature for independence from `label` and selects per
/// `mode`. Rows where the feature or the label is null are left out of
/// that feature's table.
pub fn chi_square_select(
    frame: &Frame,
    features: &[&str],
    label: &str,
    mode: &ChiMode,
) -> Result<ChiSquareResult, SelectError> {
    mode.validate()?;
    let labels = frame.require(label)?.data.keys();
    let classes: BTreeMap<&str, usize> = {
        let mut distinct: Vec<&str> = labels.iter().flatten().map(String::as_str).collect();
        distinct.sort_unstable();
        distinct.dedup();
        distinct.into_iter().enumerate().map(|(i, c)| (c, i)).collect()
    };
    if classes.len() < 2 {
        return Err(SelectError::ConstantLabel(label.to_owned()));
    }
    let mut tests = Vec::with_capacity(features.len());
    for &feature in features {
        let values = frame.require(feature)?.data.keys();
        let mut rows: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for (v, l) in values.iter().zip(&labels) {
            if let (Some(v), Some(l)) = (v, l) {
                rows.entry(v.as_str()).or_insert_with(|| vec![0.0; classes.len()])[classes[l.as_str()]] += 1.0;
            }
        }
        let table: Vec<Vec<f64>> = rows.into_values().collect();
        let (statistic, dof, p_value) = chi_square_table(&table);
        tests.push(ChiSquareTest {
            feature: feature.to_owned(),
            statistic,
            dof,
            p_value,
        });
    }
    let selected = select_features(&tests, mode);
    Ok(ChiSquareResult {
        label: label.to_owned(),
        mode: *mode,
        tests,
        selected,
    })
}

/// Applies a selection mode to finished tests. Ties in p-value keep the
/// input order.
pub fn select_features(tests: &[ChiSquareTest], mode: &ChiMode) -> Vec<String> {
    let mut order: Vec<&ChiSquareTest> = tests.iter().collect();
    order.sort_by(|a, b| a.p_value.total_cmp(&b.p_value));
    let m = order.len();
    let take = match *mode {
        ChiMode::NumTopFeatures(k) => k.min(m),
        ChiMode::Percentile(f) => ((f * m as f64).ceil() as usize).min(m),
        ChiMode::Fpr(alpha) => order.iter().take_while(|t| t.p_value < alpha).count(),
        ChiMode::Fdr(q) => (1..=m)
            .rev()
            .find(|&i| order[i - 1].p_value <= i as f64 * q / m as f64)
            .unwrap_or(0),
    };
    order.into_iter().take(take).map(|t| t.feature.clone()).collect()
}
