use std::collections::HashMap;

use serde::Serialize;

use super::{Column, ColumnData, ColumnKind, Frame, FrameError};

/// Category ↔ index mapping produced by [`string_index`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexDictionary {
    pub column: String,
    /// Category at position `i` has index `i`.
    pub categories: Vec<String>,
    pub frequencies: Vec<usize>,
}

impl IndexDictionary {
    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn category(&self, index: i64) -> Option<&str> {
        usize::try_from(index)
            .ok()
            .and_then(|i| self.categories.get(i))
            .map(String::as_str)
    }

    pub fn index_of(&self, category: &str) -> Option<i64> {
        self.categories.iter().position(|c| c == category).map(|i| i as i64)
    }

    /// Maps an indexed column back to its categories.
    pub fn reverse(&self, data: &ColumnData) -> Result<ColumnData, FrameError> {
        let ColumnData::Int(values) = data else {
            return Err(FrameError::KindMismatch {
                column: self.column.clone(),
                expected: "int",
                found: data.kind(),
            });
        };
        Ok(ColumnData::Text(
            values
                .iter()
                .map(|v| v.and_then(|i| self.category(i)).map(str::to_owned))
                .collect(),
        ))
    }
}

/// Replaces a text column by integer category indices.
///
/// Index 0 is the most frequent category; equal frequencies order
/// lexicographically. Nulls stay null.
pub fn string_index(frame: &Frame, column: &str) -> Result<(Frame, IndexDictionary), FrameError> {
    let source = frame.require(column)?;
    let ColumnData::Text(values) = &source.data else {
        return Err(FrameError::KindMismatch {
            column: column.to_owned(),
            expected: "text",
            found: source.kind(),
        });
    };
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for value in values.iter().flatten() {
        *counts.entry(value.as_str()).or_default() += 1;
    }
    let mut ordered: Vec<(&str, usize)> = counts.into_iter().collect();
    ordered.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let lookup: HashMap<&str, i64> = ordered.iter().enumerate().map(|(i, (c, _))| (*c, i as i64)).collect();
    let indexed = ColumnData::Int(values.iter().map(|v| v.as_deref().map(|c| lookup[c])).collect());
    let dictionary = IndexDictionary {
        column: column.to_owned(),
        categories: ordered.iter().map(|(c, _)| (*c).to_owned()).collect(),
        frequencies: ordered.iter().map(|(_, n)| *n).collect(),
    };
    let replaced = frame.replace_column(
        column,
        vec![Column {
            name: column.to_owned(),
            source: source.source.clone(),
            data: indexed,
        }],
    )?;
    debug_assert_eq!(replaced.require(column)?.kind(), ColumnKind::Int);
    Ok((replaced, dictionary))
}
