use std::collections::BTreeMap;

use indexmap::IndexMap;

use super::{FlatRow, FlattenError};
use crate::schema::{fingerprint, Container, SchemaFingerprint, Segment};
use crate::value::{Scalar, ValueNode};

/// Rebuilds the nested record a row was flattened from.
///
/// Cells are placed at their source paths, split parts are joined back with
/// their delimiter and empty-container markers restored. The rebuilt record
/// must have exactly the structure described by `fingerprint`.
pub fn reconstruct(row: &FlatRow, fingerprint_: &SchemaFingerprint) -> Result<ValueNode, FlattenError> {
    let mut root = Node::Object(IndexMap::new());
    for (name, cell) in row.iter() {
        insert(&mut root, cell.source.segments(), &cell.value)
            .map_err(|msg| FlattenError::Mismatch(format!("column `{name}` at `{}`: {msg}", cell.source)))?;
    }
    let record = root.finish()?;
    let rebuilt = fingerprint(&record);
    if rebuilt.digest != fingerprint_.digest {
        return Err(FlattenError::Mismatch(describe_difference(&rebuilt, fingerprint_)));
    }
    Ok(record)
}

enum Node {
    Vacant,
    Leaf(Scalar),
    Object(IndexMap<String, Node>),
    Array(BTreeMap<usize, Node>),
    Parts {
        delimiter: char,
        parts: BTreeMap<usize, Node>,
    },
    EmptyObject,
    EmptyArray,
}

fn insert(node: &mut Node, path: &[Segment], value: &Scalar) -> Result<(), String> {
    let Some((head, rest)) = path.split_first() else {
        return match node {
            Node::Vacant => {
                *node = Node::Leaf(value.clone());
                Ok(())
            }
            _ => Err("path is written twice".into()),
        };
    };
    match head {
        Segment::Key(key) => {
            if let Node::Vacant = node {
                *node = Node::Object(IndexMap::new());
            }
            let Node::Object(map) = node else {
                return Err(format!("key `{key}` under a non-object"));
            };
            insert(map.entry(key.clone()).or_insert(Node::Vacant), rest, value)
        }
        Segment::Index(i) => {
            if let Node::Vacant = node {
                *node = Node::Array(BTreeMap::new());
            }
            let Node::Array(items) = node else {
                return Err(format!("index {i} under a non-array"));
            };
            insert(items.entry(*i).or_insert(Node::Vacant), rest, value)
        }
        Segment::Part { index, delimiter } => {
            if let Node::Vacant = node {
                *node = Node::Parts {
                    delimiter: *delimiter,
                    parts: BTreeMap::new(),
                };
            }
            match node {
                Node::Parts { delimiter: d, parts } if d == delimiter => {
                    insert(parts.entry(*index).or_insert(Node::Vacant), rest, value)
                }
                _ => Err(format!("part {index} conflicts with the enclosing value")),
            }
        }
        Segment::Empty(container) => {
            if !rest.is_empty() || !value.is_null() || !matches!(node, Node::Vacant) {
                return Err("malformed empty-container marker".into());
            }
            *node = match container {
                Container::Object => Node::EmptyObject,
                Container::Array => Node::EmptyArray,
            };
            Ok(())
        }
        Segment::AnyIndex => Err("wildcard in a concrete path".into()),
    }
}

impl Node {
    fn finish(self) -> Result<ValueNode, FlattenError> {
        Ok(match self {
            Node::Vacant => ValueNode::Object(IndexMap::new()),
            Node::Leaf(s) => s.into_node(),
            Node::Object(map) => ValueNode::Object(
                map.into_iter()
                    .map(|(k, v)| v.finish().map(|v| (k, v)))
                    .collect::<Result<_, _>>()?,
            ),
            Node::Array(items) => {
                if items.keys().enumerate().any(|(pos, &i)| pos != i) {
                    return Err(FlattenError::Mismatch("list positions are not contiguous".into()));
                }
                ValueNode::Array(items.into_values().map(Node::finish).collect::<Result<_, _>>()?)
            }
            Node::Parts { delimiter, parts } => ValueNode::Text(join_parts(delimiter, parts)?),
            Node::EmptyObject => ValueNode::Object(IndexMap::new()),
            Node::EmptyArray => ValueNode::Array(Vec::new()),
        })
    }
}

fn join_parts(delimiter: char, parts: BTreeMap<usize, Node>) -> Result<String, FlattenError> {
    if parts.keys().enumerate().any(|(pos, &i)| pos != i) {
        return Err(FlattenError::Mismatch("split positions are not contiguous".into()));
    }
    let mut pieces = Vec::with_capacity(parts.len());
    for part in parts.into_values() {
        pieces.push(match part {
            Node::Leaf(Scalar::Text(s)) => s,
            Node::Leaf(Scalar::Int(i)) => i.to_string(),
            Node::Parts { delimiter, parts } => join_parts(delimiter, parts)?,
            _ => return Err(FlattenError::Mismatch("split part is not text".into())),
        });
    }
    Ok(pieces.join(&delimiter.to_string()))
}

fn describe_difference(rebuilt: &SchemaFingerprint, expected: &SchemaFingerprint) -> String {
    let missing = expected.entries.iter().find(|e| !rebuilt.entries.contains(e));
    let extra = rebuilt.entries.iter().find(|e| !expected.entries.contains(e));
    match (missing, extra) {
        (Some(e), _) => format!("row lacks `{}` ({})", e.path, e.kind),
        (None, Some(e)) => format!("row has unexpected `{}` ({})", e.path, e.kind),
        (None, None) => "fingerprint digests differ".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatten::{flatten_record, FlattenConfig};
    use crate::ingest::parse_record;
    use crate::schema::SchemaRegistry;

    fn round_trip(lines: &[&str]) {
        let recs: Vec<ValueNode> = lines.iter().map(|l| parse_record(l, 1).unwrap()).collect();
        let reg = SchemaRegistry::build(&recs).unwrap();
        for rec in &recs {
            let row = flatten_record(rec, &reg, &FlattenConfig::default()).unwrap();
            let back = reconstruct(&row, &fingerprint(rec)).unwrap();
            assert!(back.eq_ordered(rec), "{back} != {rec}");
        }
    }

    #[test]
    fn empty_record() {
        round_trip(&["{}"]);
    }

    #[test]
    fn nested_shapes() {
        round_trip(&[
            r#"{"_id":{"$oid":"x"},"payload":{"raw_sig":"4:64+0:0:1024,0:df:0","cmds":["a","b"]}}"#,
            r#"{"_id":{"$oid":"y"},"payload":{"raw_sig":"4:128+0:0:00,7:df:1","e":{},"l":[],"n":null}}"#,
        ]);
    }

    #[test]
    fn wrong_fingerprint_is_rejected() {
        let recs = vec![parse_record(r#"{"a":1}"#, 1).unwrap()];
        let reg = SchemaRegistry::build(&recs).unwrap();
        let row = flatten_record(&recs[0], &reg, &FlattenConfig::default()).unwrap();
        let other = fingerprint(&parse_record(r#"{"a":1,"b":2}"#, 1).unwrap());
        let err = reconstruct(&row, &other).unwrap_err();
        assert!(err.to_string().contains('b'), "{err}");
    }
}
