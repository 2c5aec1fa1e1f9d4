use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::SelectError;
use crate::frame::{ColumnData, ColumnKind, Frame};
use crate::par;

/// Features considered at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSubset {
    All,
    /// ⌈√p⌉ features drawn per split.
    Sqrt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub n_trees: usize,
    pub bootstrap: bool,
    pub features: FeatureSubset,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 5,
            n_trees: 20,
            bootstrap: true,
            features: FeatureSubset::Sqrt,
            seed: 42,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum FeatureData {
    Numeric(Vec<Option<f64>>),
    Categorical { codes: Vec<Option<usize>>, levels: usize },
}

/// Features and label codes for rows with a non-null label.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<String>,
    pub label: String,
    /// Label category of code `i`.
    pub classes: Vec<String>,
    data: Vec<FeatureData>,
    labels: Vec<usize>,
}

impl Dataset {
    /// Text columns are categorical; every other kind is numeric.
    pub fn from_frame(frame: &Frame, features: &[&str], label: &str) -> Result<Dataset, SelectError> {
        if features.is_empty() {
            return Err(SelectError::NoFeatures);
        }
        let label_keys = frame.require(label)?.data.keys();
        let rows: Vec<usize> = (0..label_keys.len()).filter(|&i| label_keys[i].is_some()).collect();
        let (classes, labels) = encode(&rows.iter().map(|&r| label_keys[r].clone()).collect::<Vec<_>>());
        if classes.len() < 2 {
            return Err(SelectError::ConstantLabel(label.to_owned()));
        }
        let labels = labels
            .into_iter()
            .map(|c| c.expect("null labels are filtered"))
            .collect();
        let mut data = Vec::with_capacity(features.len());
        for &name in features {
            let column = frame.require(name)?;
            data.push(match &column.data {
                ColumnData::Text(_) => {
                    let keys = column.data.keys();
                    let (levels, codes) = encode(&rows.iter().map(|&r| keys[r].clone()).collect::<Vec<_>>());
                    FeatureData::Categorical {
                        codes,
                        levels: levels.len(),
                    }
                }
                other => {
                    let values = other.numeric().unwrap_or_default();
                    FeatureData::Numeric(rows.iter().map(|&r| values[r].filter(|v| !v.is_nan())).collect())
                }
            });
        }
        Ok(Dataset {
            features: features.iter().map(|f| (*f).to_owned()).collect(),
            label: label.to_owned(),
            classes,
            data,
            labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn label_of(&self, row: usize) -> usize {
        self.labels[row]
    }
}

fn encode(keys: &[Option<String>]) -> (Vec<String>, Vec<Option<usize>>) {
    let mut levels: Vec<String> = keys.iter().flatten().cloned().collect();
    levels.sort_unstable();
    levels.dedup();
    let codes = keys
        .iter()
        .map(|k| {
            k.as_ref()
                .map(|k| levels.binary_search(k).expect("level was collected"))
        })
        .collect();
    (levels, codes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Test {
    /// Left when value ≤ threshold; nulls go right.
    Threshold(f64),
    /// Left when the category code matches.
    Category(usize),
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        test: Test,
        left: usize,
        right: usize,
    },
}

/// CART classification tree with Gini impurity.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    /// Raw impurity decrease per feature, in sample-count units.
    decrease: Vec<f64>,
}

struct Grower<'a> {
    data: &'a Dataset,
    max_depth: usize,
    per_split: usize,
    rng: Option<&'a mut ChaCha8Rng>,
    nodes: Vec<Node>,
    decrease: Vec<f64>,
}

impl DecisionTree {
    /// Grows a tree on every row with every feature considered at each split.
    pub fn fit(data: &Dataset, max_depth: usize) -> DecisionTree {
        let rows: Vec<usize> = (0..data.rows()).collect();
        Self::grow(data, &rows, max_depth, data.features.len(), None)
    }

    fn grow(
        data: &Dataset,
        rows: &[usize],
        max_depth: usize,
        per_split: usize,
        rng: Option<&mut ChaCha8Rng>,
    ) -> DecisionTree {
        let mut grower = Grower {
            data,
            max_depth,
            per_split,
            rng,
            nodes: Vec::new(),
            decrease: vec![0.0; data.features.len()],
        };
        let mut rows = rows.to_vec();
        grower.node(&mut rows, 0);
        DecisionTree {
            nodes: grower.nodes,
            decrease: grower.decrease,
        }
    }

    /// Importances normalised to sum 1; all zero when the tree never splits.
    pub fn importances(&self) -> Vec<f64> {
        normalise(&self.decrease)
    }

    pub fn predict(&self, data: &Dataset, row: usize) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    test,
                    left,
                    right,
                } => {
                    at = if goes_left(data, *feature, *test, row) {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

fn goes_left(data: &Dataset, feature: usize, test: Test, row: usize) -> bool {
    match (&data.data[feature], test) {
        (FeatureData::Numeric(v), Test::Threshold(t)) => v[row].is_some_and(|x| x <= t),
        (FeatureData::Categorical { codes, .. }, Test::Category(c)) => codes[row] == Some(c),
        _ => false,
    }
}

fn normalise(values: &[f64]) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        values.iter().map(|v| v / total).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// `n · gini` expressed through class counts.
fn impurity_mass(counts: &[f64], n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    n - counts.iter().map(|c| c * c).sum::<f64>() / n
}

const MIN_DECREASE: f64 = 1e-12;

impl Grower<'_> {
    fn node(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let classes = self.data.classes.len();
        let mut counts = vec![0.0; classes];
        for &r in rows.iter() {
            counts[self.data.labels[r]] += 1.0;
        }
        let majority = counts
            .iter()
            .enumerate()
            .fold(0, |best, (i, &c)| if c > counts[best] { i } else { best });
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class: majority });
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        if depth >= self.max_depth || rows.len() < 2 || pure {
            return id;
        }
        let candidates = self.candidates();
        let n = rows.len() as f64;
        let parent = impurity_mass(&counts, n);
        let mut best: Option<(f64, usize, Test)> = None;
        for feature in candidates {
            if let Some((gain, test)) = self.best_split(feature, rows, &counts, parent) {
                if gain > MIN_DECREASE && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, feature, test));
                }
            }
        }
        let Some((gain, feature, test)) = best else {
            return id;
        };
        self.decrease[feature] += gain;
        let data = self.data;
        let mid = partition(rows, |r| goes_left(data, feature, test, r));
        let (left_rows, right_rows) = rows.split_at_mut(mid);
        let left = self.node(left_rows, depth + 1);
        let right = self.node(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            test,
            left,
            right,
        };
        id
    }

    fn candidates(&mut self) -> Vec<usize> {
        let p = self.data.features.len();
        match self.rng.as_deref_mut() {
            Some(rng) if self.per_split < p => {
                let mut picked = index::sample(rng, p, self.per_split).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..p).collect(),
        }
    }

    fn best_split(&self, feature: usize, rows: &[usize], counts: &[f64], parent: f64) -> Option<(f64, Test)> {
        let labels = &self.data.labels;
        let classes = counts.len();
        let n: f64 = rows.len() as f64;
        let gain_of = |left: &[f64]| {
            let nl: f64 = left.iter().sum();
            let right: Vec<f64> = counts.iter().zip(left).map(|(t, l)| t - l).collect();
            parent - impurity_mass(left, nl) - impurity_mass(&right, n - nl)
        };
        match &self.data.data[feature] {
            FeatureData::Numeric(values) => {
                let mut present: Vec<(f64, usize)> =
                    rows.iter().filter_map(|&r| values[r].map(|v| (v, labels[r]))).collect();
                present.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut left = vec![0.0; classes];
                let mut best: Option<(f64, Test)> = None;
                for i in 0..present.len().saturating_sub(1) {
                    left[present[i].1] += 1.0;
                    let (lo, hi) = (present[i].0, present[i + 1].0);
                    if lo == hi {
                        continue;
                    }
                    let gain = gain_of(&left);
                    if best.is_none_or(|(g, _)| gain > g) {
                        let mut threshold = lo + (hi - lo) / 2.0;
                        if threshold >= hi || !threshold.is_finite() {
                            threshold = lo;
                        }
                        best = Some((gain, Test::Threshold(threshold)));
                    }
                }
                best
            }
            FeatureData::Categorical { codes, levels } => {
                let mut per_level = vec![vec![0.0; classes]; *levels];
                for &r in rows {
                    if let Some(c) = codes[r] {
                        per_level[c][labels[r]] += 1.0;
                    }
                }
                let mut best: Option<(f64, Test)> = None;
                for (level, left) in per_level.iter().enumerate() {
                    let nl: f64 = left.iter().sum();
                    if nl == 0.0 || nl == n {
                        continue;
                    }
                    let gain = gain_of(left);
                    if best.is_none_or(|(g, _)| gain > g) {
                        best = Some((gain, Test::Category(level)));
                    }
                }
                best
            }
        }
    }
}

/// Stable in-place partition; returns the number of rows satisfying `left`.
fn partition(rows: &mut [usize], left: impl Fn(usize) -> bool) -> usize {
    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&x| left(x));
    let mid = l.len();
    rows[..mid].copy_from_slice(&l);
    rows[mid..].copy_from_slice(&r);
    mid
}

/// Bagged CART trees.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Tree `t` draws from a ChaCha8 stream `t` under `cfg.seed`, so the
    /// result does not depend on the worker count.
    pub fn fit(data: &Dataset, cfg: &TreeConfig) -> RandomForest {
        let p = data.features.len();
        let per_split = match cfg.features {
            FeatureSubset::All => p,
            FeatureSubset::Sqrt => ((p as f64).sqrt().ceil() as usize).clamp(1, p.max(1)),
        };
        let ids: Vec<u64> = (0..cfg.n_trees as u64).collect();
        let trees = par::ordered_map(&ids, cfg.workers, |&t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t);
            let n = data.rows();
            let rows: Vec<usize> = if cfg.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            DecisionTree::grow(data, &rows, cfg.max_depth, per_split, Some(&mut rng))
        });
        RandomForest { trees }
    }

    /// Mean of the per-tree importances, renormalised to sum 1.
    pub fn importances(&self) -> Vec<f64> {
        let Some(first) = self.trees.first() else {
            return Vec::new();
        };
        let mut sum = vec![0.0; first.decrease.len()];
        for tree in &self.trees {
            for (s, v) in sum.iter_mut().zip(tree.importances()) {
                *s += v;
            }
        }
        normalise(&sum)
    }

    /// Majority vote; ties go to the smaller class code.
    pub fn predict(&self, data: &Dataset, row: usize) -> usize {
        let mut votes = vec![0usize; data.classes.len()];
        for tree in &self.trees {
            votes[tree.predict(data, row)] += 1;
        }
        votes
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > votes[best] { i } else { best })
    }
}

/// Feature importances against one label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Importance {
    pub label: String,
    pub method: &'static str,
    pub features: Vec<String>,
    pub values: Vec<f64>,
}

pub fn tree_importance(
    frame: &Frame,
    features: &[&str],
    label: &str,
    cfg: &TreeConfig,
) -> Result<Importance, SelectError> {
    let data = Dataset::from_frame(frame, features, label)?;
    let tree = DecisionTree::fit(&data, cfg.max_depth);
    Ok(Importance {
        label: label.to_owned(),
        method: "decision_tree",
        features: data.features.clone(),
        values: tree.importances(),
    })
}

pub fn forest_importance(
    frame: &Frame,
    features: &[&str],
    label: &str,
    cfg: &TreeConfig,
) -> Result<Importance, SelectError> {
    let data = Dataset::from_frame(frame, features, label)?;
    let forest = RandomForest::fit(&data, cfg);
    Ok(Importance {
        label: label.to_owned(),
        method: "random_forest",
        features: data.features.clone(),
        values: forest.importances(),
    })
}

/// Text and bool columns with 2..=`max_categories` distinct values.
pub fn categorical_columns(frame: &Frame, max_categories: usize) -> Vec<String> {
    frame
        .columns()
        .iter()
        .filter(|c| matches!(c.kind(), ColumnKind::Text | ColumnKind::Bool))
        .filter(|c| (2..=max_categories).contains(&c.data.distinct_count()))
        .map(|c| c.name.clone())
        .collect()
}

/// Forest importances with each categorical column in turn as the label and
/// every other column as a feature.
pub fn pseudo_label_importances(
    frame: &Frame,
    max_categories: usize,
    cfg: &TreeConfig,
) -> Result<Vec<Importance>, SelectError> {
    let mut out = Vec::new();
    for label in categorical_columns(frame, max_categories) {
        let features: Vec<&str> = frame.column_names().filter(|n| *n != label).collect();
        if features.is_empty() {
            continue;
        }
        out.push(forest_importance(frame, &features, &label, cfg)?);
    }
    Ok(out)
}
