//! Record flattening and frame assembly.
//!
//! [`flatten_record`] turns one nested record into a [`FlatRow`] of scalar
//! cells, driven by the field classes in a [`SchemaRegistry`].
//! [`partition_by_schema`] assembles one frame per baseline structure (local
//! mode) and [`unify_global`] one wide frame over all records (global mode).

mod assemble;
mod reconstruct;
pub(crate) mod walk;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use assemble::{partition_by_schema, unify_global, LocalFrames, REJECT_FRAME};
pub use reconstruct::reconstruct;

use crate::frame::FrameError;
use crate::ingest::DEFAULT_MAX_DEPTH;
use crate::schema::{unique_name, ClassOverrides, FieldPath, RegistryConfig, SchemaRegistry, DEFAULT_SAMPLE_SIZE};
use crate::value::{Scalar, ValueNode};

#[derive(Debug, Error)]
pub enum FlattenError {
    #[error("record is {found}, expected an object")]
    NotAnObject { found: &'static str },
    #[error("flattening `{path}` exceeds the depth limit of {max_depth}")]
    DepthExceeded { path: String, max_depth: usize },
    #[error("row does not match fingerprint: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Local,
    Global,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(Mode::Local),
            "global" => Ok(Mode::Global),
            other => Err(format!("unknown mode `{other}` (expected local or global)")),
        }
    }
}

/// How null cells are filled once a frame is assembled.
///
/// `Mean` and `Median` apply to numeric columns; other columns get the empty
/// string under those policies.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum NullFill {
    #[default]
    None,
    Mean,
    Median,
    Sentinel(Scalar),
}

impl fmt::Display for NullFill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NullFill::None => f.write_str("none"),
            NullFill::Mean => f.write_str("mean"),
            NullFill::Median => f.write_str("median"),
            NullFill::Sentinel(v) => write!(f, "sentinel={}", v.to_json()),
        }
    }
}

impl FromStr for NullFill {
    type Err = String;

    /// `none`, `mean`, `median` or `sentinel=<value>`; the value is read as a
    /// JSON scalar when it parses as one, otherwise as text.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(NullFill::None),
            "mean" => Ok(NullFill::Mean),
            "median" => Ok(NullFill::Median),
            _ => {
                let Some(raw) = s.strip_prefix("sentinel=") else {
                    return Err(format!(
                        "unknown null fill `{s}` (expected none, mean, median or sentinel=<value>)"
                    ));
                };
                let value = match serde_json::from_str::<serde_json::Value>(raw) {
                    Ok(json) => Scalar::from_json(&json).ok_or_else(|| format!("sentinel `{raw}` must be a scalar"))?,
                    Err(_) => Scalar::Text(raw.to_owned()),
                };
                if value.is_null() {
                    return Err("sentinel must not be null".into());
                }
                Ok(NullFill::Sentinel(value))
            }
        }
    }
}

impl Serialize for NullFill {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            NullFill::Sentinel(v) => {
                let mut map = serde_json::Map::new();
                map.insert("sentinel".into(), v.to_json());
                map.serialize(serializer)
            }
            other => serializer.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for NullFill {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = serde_json::Value::deserialize(deserializer)?;
        match value {
            serde_json::Value::String(s) if !s.starts_with("sentinel=") => s.parse().map_err(D::Error::custom),
            serde_json::Value::Object(map) if map.len() == 1 && map.contains_key("sentinel") => {
                match Scalar::from_json(&map["sentinel"]) {
                    Some(Scalar::Null) | None => Err(D::Error::custom("sentinel must be a non-null scalar")),
                    Some(v) => Ok(NullFill::Sentinel(v)),
                }
            }
            other => Err(D::Error::custom(format!(
                "null_fill must be \"none\", \"mean\", \"median\" or {{\"sentinel\": <scalar>}}, got {other}"
            ))),
        }
    }
}

/// Flattening settings. `mode` and `workers` are set by the caller and are
/// not part of the serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlattenConfig {
    #[serde(skip)]
    pub mode: Mode,
    /// Rendered path patterns always treated as dictionary unions.
    pub dict_columns: BTreeSet<String>,
    /// Rendered path patterns split on a fixed delimiter.
    pub delimiters: BTreeMap<String, char>,
    pub max_depth: usize,
    pub null_fill: NullFill,
    pub sample_size: usize,
    #[serde(skip)]
    pub workers: usize,
}

impl Default for FlattenConfig {
    fn default() -> Self {
        FlattenConfig {
            mode: Mode::Local,
            dict_columns: BTreeSet::new(),
            delimiters: BTreeMap::new(),
            max_depth: DEFAULT_MAX_DEPTH,
            null_fill: NullFill::None,
            sample_size: DEFAULT_SAMPLE_SIZE,
            workers: 1,
        }
    }
}

impl FlattenConfig {
    pub fn registry_config(&self) -> RegistryConfig {
        RegistryConfig {
            sample_size: self.sample_size,
            overrides: ClassOverrides {
                dict_paths: self.dict_columns.clone(),
                delimiters: self.delimiters.clone(),
            },
            workers: self.workers,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatCell {
    pub value: Scalar,
    /// Concrete source path of the cell in the original record.
    pub source: Arc<FieldPath>,
}

/// One flattened record: ordered column name → scalar cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatRow {
    cells: IndexMap<Arc<str>, FlatCell>,
}

impl FlatRow {
    pub fn get(&self, name: &str) -> Option<&Scalar> {
        self.cells.get(name).map(|c| &c.value)
    }

    pub fn cell(&self, name: &str) -> Option<&FlatCell> {
        self.cells.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.cells.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.cells.keys().map(|k| &**k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &FlatCell)> {
        self.cells.iter().map(|(k, v)| (&**k, v))
    }

    /// Adds a cell; an existing name is replaced.
    pub fn insert(&mut self, name: impl Into<Arc<str>>, source: impl Into<Arc<FieldPath>>, value: Scalar) {
        self.cells.insert(
            name.into(),
            FlatCell {
                value,
                source: source.into(),
            },
        );
    }
}

/// Flattens one record into scalar cells named by the registry.
pub fn flatten_record(
    record: &ValueNode,
    registry: &SchemaRegistry,
    cfg: &FlattenConfig,
) -> Result<FlatRow, FlattenError> {
    if !matches!(record, ValueNode::Object(_)) {
        return Err(FlattenError::NotAnObject {
            found: record.kind_name(),
        });
    }
    let mut row = FlatRow::default();
    walk::walk_record(record, registry.classes(), cfg.max_depth, &mut |path, value| {
        let value = value.to_scalar();
        match registry.column(path) {
            Some(column) => row.insert(column.name.clone(), column.source.clone(), value),
            None => {
                let name = unique_name(&crate::schema::column_base_name(path), |n| {
                    registry.is_name_taken(n) || row.contains(n)
                });
                row.insert(name, FieldPath::from_segments(path.to_vec()), value);
            }
        }
    })?;
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_record;

    fn flatten_one(lines: &[&str], which: usize) -> FlatRow {
        let recs: Vec<ValueNode> = lines.iter().map(|l| parse_record(l, 1).unwrap()).collect();
        let reg = SchemaRegistry::build(&recs).unwrap();
        flatten_record(&recs[which], &reg, &FlattenConfig::default()).unwrap()
    }

    #[test]
    fn struct_leaf_is_promoted() {
        let row = flatten_one(&[r#"{"_id":{"$oid":"5776664eb3c585471bf1bb5"}}"#], 0);
        assert_eq!(row.len(), 1);
        assert_eq!(
            row.get("_id_oid"),
            Some(&Scalar::Text("5776664eb3c585471bf1bb5".into()))
        );
        assert!(!row.contains("_id"));
    }

    #[test]
    fn delimited_string_splits_into_positions() {
        let row = flatten_one(&[r#"{"raw_sig":"a:b:c"}"#, r#"{"raw_sig":"d:e:f"}"#], 0);
        let cells: Vec<(&str, &Scalar)> = row.iter().map(|(n, c)| (n, &c.value)).collect();
        assert_eq!(
            cells,
            vec![
                ("raw_sig_0", &Scalar::Text("a".into())),
                ("raw_sig_1", &Scalar::Text("b".into())),
                ("raw_sig_2", &Scalar::Text("c".into())),
            ]
        );
    }

    #[test]
    fn second_level_split_yields_numbers() {
        let row = flatten_one(
            &[
                r#"{"raw_sig":"4:64+0:0:1024,0:df:0"}"#,
                r#"{"raw_sig":"4:128+0:0:1460,7:df:1"}"#,
            ],
            0,
        );
        assert_eq!(row.get("raw_sig_3_0"), Some(&Scalar::Int(1024)));
        assert_eq!(row.get("raw_sig_3_1"), Some(&Scalar::Int(0)));
        assert!(!row.contains("raw_sig_3"));
        assert_eq!(row.get("raw_sig_1"), Some(&Scalar::Text("64+0".into())));
    }

    #[test]
    fn lists_get_one_column_per_position() {
        let row = flatten_one(&[r#"{"cmd":["ls","pwd"]}"#], 0);
        assert_eq!(row.get("cmd_0"), Some(&Scalar::Text("ls".into())));
        assert_eq!(row.get("cmd_1"), Some(&Scalar::Text("pwd".into())));
    }

    #[test]
    fn dict_union_fields_are_flattened_under_the_dict() {
        let lines = [r#"{"payload":{"proto":"tcp"}}"#, r#"{"payload":{"url":"x","n":1}}"#];
        let row = flatten_one(&lines, 1);
        assert_eq!(row.get("payload_url"), Some(&Scalar::Text("x".into())));
        assert_eq!(row.get("payload_n"), Some(&Scalar::Int(1)));
    }

    #[test]
    fn flat_record_flattens_to_itself() {
        let row = flatten_one(&[r#"{"a":1,"b":"x","c":null,"d":true}"#], 0);
        let names: Vec<&str> = row.names().collect();
        assert_eq!(names, vec!["a", "b", "c", "d"]);
        assert_eq!(row.get("c"), Some(&Scalar::Null));
    }

    #[test]
    fn depth_limit_names_path() {
        let recs = vec![parse_record(r#"{"a":{"b":{"c":1}}}"#, 1).unwrap()];
        let reg = SchemaRegistry::build(&recs).unwrap();
        let cfg = FlattenConfig {
            max_depth: 2,
            ..FlattenConfig::default()
        };
        let err = flatten_record(&recs[0], &reg, &cfg).unwrap_err();
        assert!(
            matches!(err, FlattenError::DepthExceeded { ref path, .. } if path == "a.b.c"),
            "{err}"
        );
    }

    #[test]
    fn unseen_paths_get_fallback_names() {
        let recs = vec![parse_record(r#"{"a_b":1}"#, 1).unwrap()];
        let reg = SchemaRegistry::build(&recs).unwrap();
        let other = parse_record(r#"{"a":{"b":2},"z":3}"#, 1).unwrap();
        let row = flatten_record(&other, &reg, &FlattenConfig::default()).unwrap();
        let names: Vec<&str> = row.names().collect();
        assert_eq!(names, vec!["a_b_2", "z"]);
    }

    #[test]
    fn null_fill_parses() {
        assert_eq!("mean".parse::<NullFill>().unwrap(), NullFill::Mean);
        assert_eq!(
            "sentinel=NA".parse::<NullFill>().unwrap(),
            NullFill::Sentinel(Scalar::Text("NA".into()))
        );
        assert_eq!(
            "sentinel=-1".parse::<NullFill>().unwrap(),
            NullFill::Sentinel(Scalar::Int(-1))
        );
        assert!("sentinel=null".parse::<NullFill>().is_err());
        let json = serde_json::to_string(&NullFill::Sentinel(Scalar::Int(0))).unwrap();
        assert_eq!(json, r#"{"sentinel":0}"#);
        assert_eq!(
            serde_json::from_str::<NullFill>(&json).unwrap(),
            NullFill::Sentinel(Scalar::Int(0))
        );
    }
}
