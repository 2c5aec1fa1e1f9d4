//! Feature selection over assembled frames.
//!
//! * [`drop_single_valued`] removes columns carrying at most one value.
//! * [`propose_namespace_merges`] / [`apply_merges`] unify differently named
//!   columns that hold the same datum.
//! * [`pearson_matrix`] / [`prune_by_correlation`] remove redundant numeric
//!   columns.
//! * [`chi_square_select`] ranks categorical features against a label.
//! * [`partition_by_category`] and the tree / forest importances cover the
//!   unlabelled case through pseudo-labels.

mod category;
mod chi;
mod gamma;
mod namespace;
mod pearson;
mod single;
mod tree;

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

pub use category::{partition_by_category, CategorySubset, DEFAULT_MAX_CATEGORIES};
pub use chi::{chi_square_select, chi_square_table, select_features, ChiMode, ChiSquareResult, ChiSquareTest};
pub use gamma::{chi_square_sf, ln_gamma, regularized_gamma_q};
pub use namespace::{
    apply_merges, expanded_name, name_similarity, propose_namespace_merges, tokenize, value_jaccard, AbbreviationTable,
    MergeCandidate, MergeOutcome, NAME_SIMILARITY_THRESHOLD, VALUE_JACCARD_THRESHOLD,
};
pub use pearson::{
    pearson_matrix, pearson_matrix_with, prune_by_correlation, CorrelatedPair, CorrelationMatrix, Pruned,
};
pub use single::drop_single_valued;
pub use tree::{
    categorical_columns, forest_importance, pseudo_label_importances, tree_importance, Dataset, DecisionTree,
    FeatureSubset, Importance, RandomForest, TreeConfig,
};

use crate::frame::{ColumnKind, FrameError};

#[derive(Debug, Error)]
pub enum SelectError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("column `{column}` is {found}, expected {expected}")]
    Kind {
        column: String,
        expected: &'static str,
        found: ColumnKind,
    },
    #[error("label `{0}` has fewer than two categories; no test is possible")]
    ConstantLabel(String),
    #[error("no features to evaluate")]
    NoFeatures,
    #[error(
        "column `{column}` has {found} categories, more than the maximum of {max}; \
         pick a column with fewer categories or raise max_categories"
    )]
    TooManyCategories { column: String, found: usize, max: usize },
    #[error("invalid selection mode: {0}")]
    InvalidMode(String),
}

/// Why a column left the frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DropReason {
    SingleValued,
    AllNull,
    CorrelatedWith(String),
    NotSelectedChi,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::SingleValued => f.write_str("single_valued"),
            DropReason::AllNull => f.write_str("all_null"),
            DropReason::CorrelatedWith(c) => write!(f, "correlated_with:{c}"),
            DropReason::NotSelectedChi => f.write_str("not_selected_chi"),
        }
    }
}

impl Serialize for DropReason {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedColumn {
    pub column: String,
    pub reason: DropReason,
}

/// Selection settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectConfig {
    pub max_categories: usize,
    pub pearson_threshold: f64,
    pub chi_mode: Option<ChiMode>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
    /// Run the tree/forest importance stage.
    pub importance: bool,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig {
            max_categories: DEFAULT_MAX_CATEGORIES,
            pearson_threshold: 0.9,
            chi_mode: None,
            n_trees: 20,
            max_depth: 5,
            seed: 42,
            importance: true,
        }
    }
}

impl SelectConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.pearson_threshold > 0.0 && self.pearson_threshold <= 1.0) {
            return Err(format!(
                "pearson_threshold must be in (0, 1], got {}",
                self.pearson_threshold
            ));
        }
        if self.max_categories < 2 {
            return Err("max_categories must be at least 2".into());
        }
        if self.n_trees == 0 {
            return Err("n_trees must be at least 1".into());
        }
        if self.max_depth == 0 {
            return Err("max_depth must be at least 1".into());
        }
        if let Some(mode) = &self.chi_mode {
            mode.validate().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn tree_config(&self, workers: usize) -> TreeConfig {
        TreeConfig {
            max_depth: self.max_depth,
            n_trees: self.n_trees,
            bootstrap: true,
            features: FeatureSubset::Sqrt,
            seed: self.seed,
            workers,
        }
    }
}
