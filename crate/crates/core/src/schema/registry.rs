use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use indexmap::IndexMap;
use serde::Serialize;

use super::classify::{classify_with, ClassOverrides, FieldClass};
use super::fingerprint::{fingerprint, fingerprint_subtrees, SchemaFingerprint};
use super::path::{column_base_name, FieldPath, Segment};
use super::SchemaError;
use crate::flatten::walk::walk_record;
use crate::par;
use crate::value::ValueNode;

/// Column name reserved for the partition index in local mode.
pub const SCHEMA_TYPE_COLUMN: &str = "schemaType";

pub const DEFAULT_SAMPLE_SIZE: usize = 1000;

/// Class of every observed path pattern, in first-appearance order.
pub type ClassTable = IndexMap<FieldPath, FieldClass>;

#[derive(Debug, Clone)]
pub struct RegistryConfig {
    /// Samples kept per path for classification (first seen).
    pub sample_size: usize,
    pub overrides: ClassOverrides,
    pub workers: usize,
}

impl Default for RegistryConfig {
    fn default() -> Self {
        RegistryConfig {
            sample_size: DEFAULT_SAMPLE_SIZE,
            overrides: ClassOverrides::default(),
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaEntry {
    pub fingerprint: SchemaFingerprint,
    pub count: usize,
}

/// Digest-keyed fingerprint counts in first-appearance order.
///
/// Shards built over consecutive slices of the input merge into the same
/// result as one sequential pass, provided they are merged in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchemaCounts {
    entries: IndexMap<String, SchemaEntry>,
}

impl SchemaCounts {
    pub fn add(&mut self, fingerprint: SchemaFingerprint) {
        self.add_n(fingerprint, 1);
    }

    fn add_n(&mut self, fingerprint: SchemaFingerprint, n: usize) {
        self.entries
            .entry(fingerprint.digest.clone())
            .or_insert_with(|| SchemaEntry { fingerprint, count: 0 })
            .count += n;
    }

    pub fn merge(&mut self, other: SchemaCounts) {
        for (_, entry) in other.entries {
            self.add_n(entry.fingerprint, entry.count);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> usize {
        self.entries.values().map(|e| e.count).sum()
    }

    pub fn get(&self, digest: &str) -> Option<&SchemaEntry> {
        self.entries.get(digest)
    }

    pub fn index_of(&self, digest: &str) -> Option<usize> {
        self.entries.get_index_of(digest)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SchemaEntry> {
        self.entries.values()
    }

    fn from_fingerprints(fingerprints: Vec<SchemaFingerprint>) -> Self {
        let mut counts = SchemaCounts::default();
        for fp in fingerprints {
            counts.add(fp);
        }
        counts
    }
}

/// Shared name and source path of a registered column.
#[derive(Debug, Clone)]
pub struct NamedColumn {
    pub name: Arc<str>,
    pub source: Arc<FieldPath>,
}

/// Registry of the distinct baseline structures in a corpus, together with
/// the field classification and the corpus-wide column naming.
#[derive(Debug, Clone)]
pub struct SchemaRegistry {
    schemas: SchemaCounts,
    classes: ClassTable,
    partition_roots: Vec<FieldPath>,
    partitions: SchemaCounts,
    columns: IndexMap<FieldPath, NamedColumn>,
    names: HashMap<String, usize>,
}

impl SchemaRegistry {
    /// Builds the registry with default configuration.
    pub fn build(records: &[ValueNode]) -> Result<Self, SchemaError> {
        Self::build_with(records, &RegistryConfig::default())
    }

    pub fn build_with(records: &[ValueNode], cfg: &RegistryConfig) -> Result<Self, SchemaError> {
        let schemas = count_fingerprints(records, cfg.workers, fingerprint);
        let classes = classify_paths(records, cfg)?;
        let partition_roots = partition_roots(&classes);
        let partitions = if partition_roots.is_empty() {
            schemas.clone()
        } else {
            count_fingerprints(records, cfg.workers, |r| fingerprint_subtrees(r, &partition_roots))
        };
        let mut registry = SchemaRegistry {
            schemas,
            classes,
            partition_roots,
            partitions,
            columns: IndexMap::new(),
            names: HashMap::new(),
        };
        registry.assign_column_names(records);
        Ok(registry)
    }

    /// Top-level fingerprints with counts, in first-appearance order.
    pub fn schemas(&self) -> &SchemaCounts {
        &self.schemas
    }

    /// Number of distinct baseline structures.
    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    pub fn record_count(&self) -> usize {
        self.schemas.total()
    }

    pub fn classes(&self) -> &ClassTable {
        &self.classes
    }

    pub fn class_of(&self, pattern: &[Segment]) -> FieldClass {
        self.classes.get(pattern).copied().unwrap_or(FieldClass::Scalar)
    }

    /// Outermost dictionary-union paths; local mode partitions on their
    /// inner schemas.
    pub fn partition_roots(&self) -> &[FieldPath] {
        &self.partition_roots
    }

    /// Local-mode partitions: inner schemas of the dictionary-union roots, or
    /// the top-level schemas when there is no dictionary union.
    pub fn partitions(&self) -> &SchemaCounts {
        &self.partitions
    }

    /// Fingerprint deciding which local partition `record` belongs to.
    pub fn partition_fingerprint(&self, record: &ValueNode) -> SchemaFingerprint {
        if self.partition_roots.is_empty() {
            fingerprint(record)
        } else {
            fingerprint_subtrees(record, &self.partition_roots)
        }
    }

    /// Column name assigned to a concrete leaf path, if the path was seen.
    pub fn column_name(&self, path: &[Segment]) -> Option<&str> {
        self.columns.get(path).map(|c| &*c.name)
    }

    pub fn column(&self, path: &[Segment]) -> Option<&NamedColumn> {
        self.columns.get(path)
    }

    /// Corpus-wide first-appearance rank of a column name.
    pub fn column_rank(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    pub fn is_name_taken(&self, name: &str) -> bool {
        name == SCHEMA_TYPE_COLUMN || self.names.contains_key(name)
    }

    /// `(column name, source path)` for every named column.
    pub fn columns(&self) -> impl Iterator<Item = (&str, &FieldPath)> {
        self.columns.iter().map(|(p, c)| (&*c.name, p))
    }

    fn assign_column_names(&mut self, records: &[ValueNode]) {
        let mut columns = IndexMap::new();
        let mut taken: HashSet<String> = HashSet::from([SCHEMA_TYPE_COLUMN.to_owned()]);
        for record in records {
            let result = walk_record(record, &self.classes, usize::MAX, &mut |path, _| {
                if columns.contains_key(path) {
                    return;
                }
                let name = unique_name(&column_base_name(path), |n| taken.contains(n));
                taken.insert(name.clone());
                let source = FieldPath::from_segments(path.to_vec());
                let column = NamedColumn {
                    name: name.into(),
                    source: Arc::new(source.clone()),
                };
                columns.insert(source, column);
            });
            debug_assert!(result.is_ok());
        }
        self.names = columns
            .values()
            .enumerate()
            .map(|(i, c)| (c.name.to_string(), i))
            .collect();
        self.columns = columns;
    }
}

/// `base`, or the first of `base_2`, `base_3`, … that `taken` does not reject.
pub(crate) fn unique_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_owned();
    }
    (2..)
        .map(|k| format!("{base}_{k}"))
        .find(|candidate| !taken(candidate))
        .expect("unbounded suffix search")
}

fn count_fingerprints(
    records: &[ValueNode],
    workers: usize,
    f: impl Fn(&ValueNode) -> SchemaFingerprint + Sync + Send,
) -> SchemaCounts {
    if workers <= 1 {
        return SchemaCounts::from_fingerprints(records.iter().map(f).collect());
    }
    let shard_len = records.len().div_ceil(workers).max(1);
    let shards: Vec<&[ValueNode]> = records.chunks(shard_len).collect();
    let partial = par::ordered_map(&shards, workers, |shard| {
        SchemaCounts::from_fingerprints(shard.iter().map(&f).collect())
    });
    let mut counts = SchemaCounts::default();
    for shard in partial {
        counts.merge(shard);
    }
    counts
}

fn classify_paths(records: &[ValueNode], cfg: &RegistryConfig) -> Result<ClassTable, SchemaError> {
    let mut samples: IndexMap<FieldPath, Vec<&ValueNode>> = IndexMap::new();
    let mut stack = Vec::new();
    for record in records {
        collect_samples(record, &mut stack, &mut samples, cfg.sample_size);
    }
    let mut classes = ClassTable::new();
    for (path, values) in &samples {
        let class = classify_with(path, values, &cfg.overrides)?;
        classes.insert(path.clone(), class);
        if let FieldClass::DelimitedString { delimiter } = class {
            let texts: Vec<&str> = values
                .iter()
                .filter_map(|v| match v {
                    ValueNode::Text(s) => Some(s.as_str()),
                    _ => None,
                })
                .collect();
            classify_parts(path, &texts, delimiter, cfg, &mut classes)?;
        }
    }
    Ok(classes)
}

/// Classifies the parts produced by splitting `texts`, recursing into parts
/// that are themselves delimited.
fn classify_parts(
    path: &FieldPath,
    texts: &[&str],
    delimiter: char,
    cfg: &RegistryConfig,
    classes: &mut ClassTable,
) -> Result<(), SchemaError> {
    let mut parts: Vec<Vec<ValueNode>> = Vec::new();
    for text in texts {
        for (i, part) in text.split(delimiter).enumerate() {
            if parts.len() <= i {
                parts.push(Vec::new());
            }
            parts[i].push(ValueNode::Text(part.to_owned()));
        }
    }
    for (index, values) in parts.iter().enumerate() {
        let part_path = path.child(Segment::Part { index, delimiter });
        let refs: Vec<&ValueNode> = values.iter().collect();
        let class = classify_with(&part_path, &refs, &cfg.overrides)?;
        classes.insert(part_path.clone(), class);
        if let FieldClass::DelimitedString { delimiter: inner } = class {
            let inner_texts: Vec<&str> = values
                .iter()
                .filter_map(|v| match v {
                    ValueNode::Text(s) => Some(s.as_str()),
                    _ => None,
                })
                .collect();
            classify_parts(&part_path, &inner_texts, inner, cfg, classes)?;
        }
    }
    Ok(())
}

fn collect_samples<'a>(
    node: &'a ValueNode,
    stack: &mut Vec<Segment>,
    samples: &mut IndexMap<FieldPath, Vec<&'a ValueNode>>,
    limit: usize,
) {
    if !stack.is_empty() {
        match samples.get_mut(stack.as_slice()) {
            Some(values) => {
                if values.len() < limit {
                    values.push(node);
                }
            }
            None => {
                samples.insert(FieldPath::from_segments(stack.clone()), vec![node]);
            }
        }
    }
    match node {
        ValueNode::Object(map) => {
            for (key, value) in map {
                stack.push(Segment::Key(key.clone()));
                collect_samples(value, stack, samples, limit);
                stack.pop();
            }
        }
        ValueNode::Array(items) => {
            stack.push(Segment::AnyIndex);
            for item in items {
                collect_samples(item, stack, samples, limit);
            }
            stack.pop();
        }
        _ => {}
    }
}

fn partition_roots(classes: &ClassTable) -> Vec<FieldPath> {
    let dicts: Vec<&FieldPath> = classes
        .iter()
        .filter(|(path, class)| {
            **class == FieldClass::DictUnion && path.segments().iter().all(|s| matches!(s, Segment::Key(_)))
        })
        .map(|(path, _)| path)
        .collect();
    dicts
        .iter()
        .filter(|path| {
            !dicts
                .iter()
                .any(|other| other.len() < path.len() && path.starts_with(other))
        })
        .map(|path| (*path).clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_record;

    fn records(lines: &[&str]) -> Vec<ValueNode> {
        lines.iter().map(|l| parse_record(l, 1).unwrap()).collect()
    }

    #[test]
    fn identical_structures_give_one_entry() {
        let recs = records(&[r#"{"a":1,"b":"x"}"#, r#"{"a":2,"b":"y"}"#, r#"{"b":"z","a":3}"#]);
        let reg = SchemaRegistry::build(&recs).unwrap();
        assert_eq!(reg.len(), 1);
        assert_eq!(reg.record_count(), 3);
    }

    #[test]
    fn distinct_structures_in_first_appearance_order() {
        let templates = [
            r#"{"a":1}"#,
            r#"{"b":"x"}"#,
            r#"{"a":1,"c":[1]}"#,
            r#"{"d":{"e":true}}"#,
        ];
        let mut lines = Vec::new();
        for round in 0..3 {
            for t in templates.iter().skip(round % 2) {
                lines.push(*t);
            }
        }
        let recs = records(&lines);
        let reg = SchemaRegistry::build(&recs).unwrap();
        assert_eq!(reg.len(), templates.len());
        let first = reg.schemas().iter().next().unwrap();
        assert_eq!(first.fingerprint.entries[0].path, "a");
        assert_eq!(reg.record_count(), lines.len());
    }

    #[test]
    fn dict_union_becomes_partition_root() {
        let recs = records(&[
            r#"{"channel":"a","payload":{"x":1,"y":2}}"#,
            r#"{"channel":"b","payload":{"z":"q"}}"#,
            r#"{"channel":"a","payload":{"x":3,"y":4}}"#,
        ]);
        let reg = SchemaRegistry::build(&recs).unwrap();
        assert_eq!(reg.partition_roots(), &[FieldPath::key("payload")]);
        assert_eq!(reg.partitions().len(), 2);
        assert_eq!(
            reg.class_of(FieldPath::key("payload").segments()),
            FieldClass::DictUnion
        );
    }

    #[test]
    fn nested_delimited_parts_are_classified() {
        let recs = records(&[
            r#"{"raw_sig":"4:64+0:0:1024,0:df:0"}"#,
            r#"{"raw_sig":"4:128+0:0:1460,7:df:1"}"#,
        ]);
        let reg = SchemaRegistry::build(&recs).unwrap();
        let part3 = FieldPath::key("raw_sig").child(Segment::Part {
            index: 3,
            delimiter: ':',
        });
        assert_eq!(
            reg.class_of(part3.segments()),
            FieldClass::DelimitedString { delimiter: ',' }
        );
        let part1 = FieldPath::key("raw_sig").child(Segment::Part {
            index: 1,
            delimiter: ':',
        });
        assert_eq!(reg.class_of(part1.segments()), FieldClass::Scalar);
    }

    #[test]
    fn class_conflict_propagates() {
        let recs = records(&[r#"{"a":{"b":1}}"#, r#"{"a":"text"}"#]);
        assert!(matches!(
            SchemaRegistry::build(&recs),
            Err(SchemaError::ClassConflict { .. })
        ));
    }

    #[test]
    fn colliding_column_names_get_suffixes() {
        let recs = records(&[r#"{"a_b":1,"a":{"b":2},"$a_b":3}"#]);
        let reg = SchemaRegistry::build(&recs).unwrap();
        let names: Vec<&str> = reg.columns().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["a_b", "a_b_2", "a_b_3"]);
    }

    #[test]
    fn schema_type_name_is_reserved() {
        let recs = records(&[r#"{"schemaType":"x"}"#]);
        let reg = SchemaRegistry::build(&recs).unwrap();
        assert_eq!(reg.columns().next().unwrap().0, "schemaType_2");
    }

    #[test]
    fn sharded_counts_match_sequential() {
        let lines: Vec<String> = (0..50).map(|i| format!("{{\"k{}\":{i}}}", i % 7)).collect();
        let recs: Vec<ValueNode> = lines.iter().map(|l| parse_record(l, 1).unwrap()).collect();
        let seq = count_fingerprints(&recs, 1, fingerprint);
        let par = count_fingerprints(&recs, 4, fingerprint);
        assert_eq!(seq, par);
    }
}
