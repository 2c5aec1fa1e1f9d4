//! Immutable typed columnar frames.
//!
//! Column-level transformations return a new [`Frame`]; the input is never
//! modified.

pub mod csv;
mod index;
pub mod jsonl;
mod scale;
pub mod time;

use std::collections::HashSet;
use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use index::{string_index, IndexDictionary};
pub use scale::zscale;
pub use time::{
    convert_time_columns, decompose_time, parse_timestamp, TimeConversion, TimeWindows, TimestampFormat,
    TimestampParser,
};

use crate::flatten::NullFill;
use crate::schema::FieldPath;
use crate::value::{format_float, Scalar, ScalarKind};

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("column `{column}` has {found} cells, frame has {expected} rows")]
    LengthMismatch {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("no column named `{0}`")]
    UnknownColumn(String),
    #[error("column `{column}` is {found}, expected {expected}")]
    KindMismatch {
        column: String,
        expected: &'static str,
        found: ColumnKind,
    },
    #[error("column `{0}` has no non-null values")]
    NoValues(String),
    #[error("unparseable timestamp `{value}` in column `{column}`, row {row}")]
    Timestamp { column: String, row: usize, value: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Text,
    Int,
    Float,
    Bool,
    Timestamp,
}

impl ColumnKind {
    pub fn name(self) -> &'static str {
        match self {
            ColumnKind::Text => "text",
            ColumnKind::Int => "int",
            ColumnKind::Float => "float",
            ColumnKind::Bool => "bool",
            ColumnKind::Timestamp => "timestamp",
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnKind::Int | ColumnKind::Float)
    }

    pub fn parse(s: &str) -> Option<ColumnKind> {
        Some(match s {
            "text" => ColumnKind::Text,
            "int" => ColumnKind::Int,
            "float" => ColumnKind::Float,
            "bool" => ColumnKind::Bool,
            "timestamp" => ColumnKind::Timestamp,
            _ => return None,
        })
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Cell vector of one column; `None` is a null cell.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Text(Vec<Option<String>>),
    Int(Vec<Option<i64>>),
    Float(Vec<Option<f64>>),
    Bool(Vec<Option<bool>>),
    Timestamp(Vec<Option<DateTime<Utc>>>),
}

impl ColumnData {
    /// Builds a column of the narrowest kind holding every value. Mixed
    /// kinds widen along null < int < float < text; bool mixed with
    /// anything else becomes text. An all-null column is text.
    pub fn from_scalars(values: &[Scalar]) -> ColumnData {
        let kind = values.iter().fold(ScalarKind::Null, |k, v| k.join(v.kind()));
        match kind {
            ScalarKind::Bool => ColumnData::Bool(
                values
                    .iter()
                    .map(|v| match v {
                        Scalar::Bool(b) => Some(*b),
                        _ => None,
                    })
                    .collect(),
            ),
            ScalarKind::Int => ColumnData::Int(
                values
                    .iter()
                    .map(|v| match v {
                        Scalar::Int(i) => Some(*i),
                        _ => None,
                    })
                    .collect(),
            ),
            ScalarKind::Float => ColumnData::Float(
                values
                    .iter()
                    .map(|v| match v {
                        Scalar::Int(i) => Some(*i as f64),
                        Scalar::Float(f) => Some(*f),
                        _ => None,
                    })
                    .collect(),
            ),
            ScalarKind::Null | ScalarKind::Text => ColumnData::Text(values.iter().map(Scalar::render).collect()),
        }
    }

    pub fn nulls(kind: ColumnKind, len: usize) -> ColumnData {
        match kind {
            ColumnKind::Text => ColumnData::Text(vec![None; len]),
            ColumnKind::Int => ColumnData::Int(vec![None; len]),
            ColumnKind::Float => ColumnData::Float(vec![None; len]),
            ColumnKind::Bool => ColumnData::Bool(vec![None; len]),
            ColumnKind::Timestamp => ColumnData::Timestamp(vec![None; len]),
        }
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Text(_) => ColumnKind::Text,
            ColumnData::Int(_) => ColumnKind::Int,
            ColumnData::Float(_) => ColumnKind::Float,
            ColumnData::Bool(_) => ColumnKind::Bool,
            ColumnData::Timestamp(_) => ColumnKind::Timestamp,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Text(v) => v.len(),
            ColumnData::Int(v) => v.len(),
            ColumnData::Float(v) => v.len(),
            ColumnData::Bool(v) => v.len(),
            ColumnData::Timestamp(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_null(&self, row: usize) -> bool {
        match self {
            ColumnData::Text(v) => v[row].is_none(),
            ColumnData::Int(v) => v[row].is_none(),
            ColumnData::Float(v) => v[row].is_none(),
            ColumnData::Bool(v) => v[row].is_none(),
            ColumnData::Timestamp(v) => v[row].is_none(),
        }
    }

    pub fn null_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_null(i)).count()
    }

    /// Cell as a scalar; timestamps come back as RFC 3339 UTC text.
    pub fn scalar(&self, row: usize) -> Scalar {
        let cell = match self {
            ColumnData::Text(v) => v[row].clone().map(Scalar::Text),
            ColumnData::Int(v) => v[row].map(Scalar::Int),
            ColumnData::Float(v) => v[row].map(Scalar::Float),
            ColumnData::Bool(v) => v[row].map(Scalar::Bool),
            ColumnData::Timestamp(v) => v[row].map(|t| Scalar::Text(format_instant(&t))),
        };
        cell.unwrap_or(Scalar::Null)
    }

    /// Canonical text of a cell, used for category keys and distinct counts.
    pub fn key(&self, row: usize) -> Option<String> {
        match self {
            ColumnData::Text(v) => v[row].clone(),
            ColumnData::Int(v) => v[row].map(|i| i.to_string()),
            ColumnData::Float(v) => v[row].map(format_float),
            ColumnData::Bool(v) => v[row].map(|b| b.to_string()),
            ColumnData::Timestamp(v) => v[row].map(|t| format_instant(&t)),
        }
    }

    pub fn keys(&self) -> Vec<Option<String>> {
        (0..self.len()).map(|i| self.key(i)).collect()
    }

    /// Numeric view for numeric and boolean columns (bool as 0/1, timestamp
    /// as epoch seconds); `None` for text columns.
    pub fn numeric(&self) -> Option<Vec<Option<f64>>> {
        Some(match self {
            ColumnData::Text(_) => return None,
            ColumnData::Int(v) => v.iter().map(|c| c.map(|i| i as f64)).collect(),
            ColumnData::Float(v) => v.clone(),
            ColumnData::Bool(v) => v.iter().map(|c| c.map(|b| if b { 1.0 } else { 0.0 })).collect(),
            ColumnData::Timestamp(v) => v
                .iter()
                .map(|c| c.map(|t| t.timestamp() as f64 + f64::from(t.timestamp_subsec_nanos()) * 1e-9))
                .collect(),
        })
    }

    /// Number of distinct non-null values.
    pub fn distinct_count(&self) -> usize {
        let mut seen = HashSet::new();
        for i in 0..self.len() {
            if let Some(k) = self.key(i) {
                seen.insert(k);
            }
        }
        seen.len()
    }

    /// Rows of `self` picked by `rows`, in that order.
    pub fn take(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Text(v) => ColumnData::Text(rows.iter().map(|&r| v[r].clone()).collect()),
            ColumnData::Int(v) => ColumnData::Int(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Float(v) => ColumnData::Float(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Bool(v) => ColumnData::Bool(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Timestamp(v) => ColumnData::Timestamp(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

pub(crate) fn format_instant(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    /// Source path in the input records, when the column came from one.
    pub source: Option<FieldPath>,
    pub data: ColumnData,
}

impl Column {
    pub fn new(name: impl Into<String>, data: ColumnData) -> Self {
        Column {
            name: name.into(),
            source: None,
            data,
        }
    }

    pub fn with_source(mut self, source: Option<FieldPath>) -> Self {
        self.source = source;
        self
    }

    pub fn kind(&self) -> ColumnKind {
        self.data.kind()
    }
}

/// Named table of equally long typed columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    name: String,
    columns: Vec<Column>,
    row_count: usize,
}

impl Frame {
    pub fn new(name: impl Into<String>, row_count: usize, columns: Vec<Column>) -> Result<Self, FrameError> {
        let mut names = HashSet::new();
        for column in &columns {
            if !names.insert(column.name.as_str()) {
                return Err(FrameError::DuplicateColumn(column.name.clone()));
            }
            if column.data.len() != row_count {
                return Err(FrameError::LengthMismatch {
                    column: column.name.clone(),
                    expected: row_count,
                    found: column.data.len(),
                });
            }
        }
        Ok(Frame {
            name: name.into(),
            columns,
            row_count,
        })
    }

    /// Frame whose row count is taken from the first column (0 if none).
    pub fn from_columns(name: impl Into<String>, columns: Vec<Column>) -> Result<Self, FrameError> {
        let rows = columns.first().map_or(0, |c| c.data.len());
        Frame::new(name, rows, columns)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&Column, FrameError> {
        self.column(name)
            .ok_or_else(|| FrameError::UnknownColumn(name.to_owned()))
    }

    pub fn null_cells(&self) -> usize {
        self.columns.iter().map(|c| c.data.null_count()).sum()
    }

    pub fn into_columns(self) -> Vec<Column> {
        self.columns
    }

    pub fn renamed(&self, name: impl Into<String>) -> Frame {
        Frame {
            name: name.into(),
            ..self.clone()
        }
    }

    /// Frame without the named columns; unknown names are ignored.
    pub fn drop_columns(&self, names: &[&str]) -> Frame {
        Frame {
            name: self.name.clone(),
            columns: self
                .columns
                .iter()
                .filter(|c| !names.contains(&c.name.as_str()))
                .cloned()
                .collect(),
            row_count: self.row_count,
        }
    }

    /// Replaces column `name` by `replacement` (one or more columns) at the
    /// same position.
    pub fn replace_column(&self, name: &str, replacement: Vec<Column>) -> Result<Frame, FrameError> {
        let at = self
            .position(name)
            .ok_or_else(|| FrameError::UnknownColumn(name.to_owned()))?;
        let mut columns = self.columns.clone();
        columns.splice(at..=at, replacement);
        Frame::new(self.name.clone(), self.row_count, columns)
    }

    pub fn with_column(&self, column: Column) -> Result<Frame, FrameError> {
        let mut columns = self.columns.clone();
        columns.push(column);
        Frame::new(self.name.clone(), self.row_count, columns)
    }

    /// Rows picked by index, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Frame {
        Frame {
            name: self.name.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    source: c.source.clone(),
                    data: c.data.take(rows),
                })
                .collect(),
            row_count: rows.len(),
        }
    }
}

/// Fills null cells per policy.
///
/// `Mean` and `Median` turn numeric columns into float columns filled with
/// the column statistic; every other column, and numeric columns without any
/// value, is filled with the empty string and becomes text. A sentinel whose
/// kind differs from the column widens the column to text.
pub fn fill_nulls(frame: &Frame, policy: &NullFill) -> Frame {
    let columns = frame
        .columns
        .iter()
        .map(|c| {
            if c.data.null_count() == 0 {
                return c.clone();
            }
            let data = match policy {
                NullFill::None => c.data.clone(),
                NullFill::Mean | NullFill::Median => {
                    let statistic = c.data.numeric().filter(|_| c.kind().is_numeric()).and_then(|values| {
                        let present: Vec<f64> = values.iter().flatten().copied().collect();
                        if matches!(policy, NullFill::Mean) {
                            mean(&present)
                        } else {
                            median(&present)
                        }
                    });
                    match statistic {
                        Some(fill) => ColumnData::Float(
                            c.data
                                .numeric()
                                .unwrap_or_default()
                                .into_iter()
                                .map(|v| Some(v.unwrap_or(fill)))
                                .collect(),
                        ),
                        None => fill_with(&c.data, &Scalar::Text(String::new())),
                    }
                }
                NullFill::Sentinel(value) => fill_with(&c.data, value),
            };
            Column {
                name: c.name.clone(),
                source: c.source.clone(),
                data,
            }
        })
        .collect();
    Frame {
        name: frame.name.clone(),
        columns,
        row_count: frame.row_count,
    }
}

fn fill_with(data: &ColumnData, value: &Scalar) -> ColumnData {
    match (data, value) {
        (ColumnData::Text(v), Scalar::Text(s)) => {
            ColumnData::Text(v.iter().map(|c| Some(c.clone().unwrap_or_else(|| s.clone()))).collect())
        }
        (ColumnData::Int(v), Scalar::Int(s)) => ColumnData::Int(v.iter().map(|c| Some(c.unwrap_or(*s))).collect()),
        (ColumnData::Float(v), Scalar::Float(s)) => {
            ColumnData::Float(v.iter().map(|c| Some(c.unwrap_or(*s))).collect())
        }
        (ColumnData::Float(v), Scalar::Int(s)) => {
            ColumnData::Float(v.iter().map(|c| Some(c.unwrap_or(*s as f64))).collect())
        }
        (ColumnData::Bool(v), Scalar::Bool(s)) => ColumnData::Bool(v.iter().map(|c| Some(c.unwrap_or(*s))).collect()),
        _ => {
            let fill = value.render().unwrap_or_default();
            ColumnData::Text(
                (0..data.len())
                    .map(|i| Some(data.key(i).unwrap_or_else(|| fill.clone())))
                    .collect(),
            )
        }
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 0 {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> Frame {
        Frame::from_columns(
            "t",
            vec![
                Column::new("n", ColumnData::Int(vec![Some(1), None, Some(4)])),
                Column::new("s", ColumnData::Text(vec![None, Some("x".into()), Some("y".into())])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        let dup = Frame::from_columns(
            "d",
            vec![
                Column::new("a", ColumnData::Int(vec![Some(1)])),
                Column::new("a", ColumnData::Int(vec![Some(1)])),
            ],
        );
        assert!(matches!(dup, Err(FrameError::DuplicateColumn(_))));
        let short = Frame::new("s", 2, vec![Column::new("a", ColumnData::Int(vec![Some(1)]))]);
        assert!(matches!(short, Err(FrameError::LengthMismatch { .. })));
    }

    #[test]
    fn widening_from_scalars() {
        let col = ColumnData::from_scalars(&[Scalar::Int(1), Scalar::Float(0.5), Scalar::Null]);
        assert_eq!(col, ColumnData::Float(vec![Some(1.0), Some(0.5), None]));
        let col = ColumnData::from_scalars(&[Scalar::Bool(true), Scalar::Int(2)]);
        assert_eq!(col, ColumnData::Text(vec![Some("true".into()), Some("2".into())]));
        assert_eq!(ColumnData::from_scalars(&[Scalar::Null]).kind(), ColumnKind::Text);
    }

    #[test]
    fn mean_fill_applies_to_numeric_columns_only() {
        let filled = fill_nulls(&frame(), &NullFill::Mean);
        assert_eq!(
            filled.columns()[0].data,
            ColumnData::Float(vec![Some(1.0), Some(2.5), Some(4.0)])
        );
        assert_eq!(
            filled.columns()[1].data,
            ColumnData::Text(vec![Some(String::new()), Some("x".into()), Some("y".into())])
        );
        assert_eq!(filled.null_cells(), 0);
    }

    #[test]
    fn median_fill() {
        let filled = fill_nulls(&frame(), &NullFill::Median);
        assert_eq!(
            filled.columns()[0].data,
            ColumnData::Float(vec![Some(1.0), Some(2.5), Some(4.0)])
        );
    }

    #[test]
    fn sentinel_fill_leaves_no_nulls() {
        let filled = fill_nulls(&frame(), &NullFill::Sentinel(Scalar::Text("NA".into())));
        assert_eq!(filled.null_cells(), 0);
        assert_eq!(
            filled.columns()[0].data,
            ColumnData::Text(vec![Some("1".into()), Some("NA".into()), Some("4".into())])
        );
        let ints = fill_nulls(&frame(), &NullFill::Sentinel(Scalar::Int(-1)));
        assert_eq!(
            ints.columns()[0].data,
            ColumnData::Int(vec![Some(1), Some(-1), Some(4)])
        );
    }

    #[test]
    fn replace_keeps_position() {
        let f = frame()
            .replace_column(
                "n",
                vec![
                    Column::new("a", ColumnData::Int(vec![None; 3])),
                    Column::new("b", ColumnData::Int(vec![None; 3])),
                ],
            )
            .unwrap();
        assert_eq!(f.column_names().collect::<Vec<_>>(), vec!["a", "b", "s"]);
    }
}
