use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::Serialize;

use super::PipelineConfig;
use crate::frame::{ColumnKind, Frame, IndexDictionary, TimeConversion};
use crate::ingest::IngestStats;
use crate::schema::{FieldClass, SchemaFingerprint, SchemaRegistry, SCHEMA_TYPE_COLUMN};
use crate::select::{ChiSquareResult, CorrelatedPair, DroppedColumn, Importance, MergeCandidate, MergeOutcome};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaSummary {
    pub index: usize,
    pub digest: String,
    pub records: usize,
    pub fields: Vec<String>,
}

impl SchemaSummary {
    fn new(index: usize, fingerprint: &SchemaFingerprint, records: usize) -> Self {
        SchemaSummary {
            index,
            digest: fingerprint.digest.clone(),
            records,
            fields: fingerprint
                .entries
                .iter()
                .map(|e| format!("{}: {}", e.path, e.kind))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassEntry {
    pub path: String,
    #[serde(flatten)]
    pub class: FieldClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistrySummary {
    /// Distinct whole-record structures.
    pub schema_count: usize,
    /// Local-mode partitions (inner structures of the dictionary unions).
    pub partition_count: usize,
    pub partition_roots: Vec<String>,
    pub schemas: Vec<SchemaSummary>,
    pub partitions: Vec<SchemaSummary>,
    /// Complex paths and their class.
    pub complex_fields: Vec<ClassEntry>,
    /// Column name → source path pattern.
    pub columns: BTreeMap<String, String>,
}

impl RegistrySummary {
    pub fn of(registry: &SchemaRegistry) -> Self {
        let summarize = |counts: &crate::schema::SchemaCounts| {
            counts
                .iter()
                .enumerate()
                .map(|(i, e)| SchemaSummary::new(i, &e.fingerprint, e.count))
                .collect::<Vec<_>>()
        };
        RegistrySummary {
            schema_count: registry.len(),
            partition_count: registry.partitions().len(),
            partition_roots: registry.partition_roots().iter().map(|p| p.to_string()).collect(),
            schemas: summarize(registry.schemas()),
            partitions: summarize(registry.partitions()),
            complex_fields: registry
                .classes()
                .iter()
                .filter(|(_, c)| c.is_complex())
                .map(|(p, c)| ClassEntry {
                    path: p.to_string(),
                    class: *c,
                })
                .collect(),
            columns: registry.columns().map(|(n, p)| (n.to_owned(), p.to_string())).collect(),
        }
    }

    /// Distinct source attributes over all named columns: the width of the
    /// global frame counted in attributes.
    pub fn global_attribute_width(registry: &SchemaRegistry) -> usize {
        registry
            .columns()
            .map(|(_, p)| p.attribute().to_string())
            .collect::<BTreeSet<_>>()
            .len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub name: String,
    pub kind: ColumnKind,
    pub source: Option<String>,
    /// Named source field the column came from.
    pub attribute: Option<String>,
}

/// Source attribute of a column, or the column name for synthetic columns.
pub fn attribute_of(column: &crate::frame::Column) -> String {
    match &column.source {
        Some(p) => p.attribute().to_string(),
        None => column.name.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameSummary {
    pub name: String,
    pub rows: usize,
    /// Columns straight after flattening.
    pub flattened: Vec<ColumnSummary>,
    pub width_columns: usize,
    pub width_attributes: usize,
    pub time_conversions: Vec<TimeConversion>,
    /// Columns of the written frame.
    pub output_columns: Vec<String>,
}

impl FrameSummary {
    pub fn of_flattened(frame: &Frame) -> Self {
        let flattened: Vec<ColumnSummary> = frame
            .columns()
            .iter()
            .map(|c| ColumnSummary {
                name: c.name.clone(),
                kind: c.kind(),
                source: c.source.as_ref().map(|p| p.to_string()),
                attribute: c.source.as_ref().map(|p| p.attribute().to_string()),
            })
            .collect();
        let attributes: BTreeSet<String> = frame.columns().iter().map(attribute_of).collect();
        FrameSummary {
            name: frame.name().to_owned(),
            rows: frame.row_count(),
            width_columns: flattened.len(),
            width_attributes: attributes.len(),
            flattened,
            time_conversions: Vec::new(),
            output_columns: Vec::new(),
        }
    }
}

/// Frame widths counted in source attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Widths {
    pub local_min: Option<usize>,
    pub local_max: Option<usize>,
    pub global: usize,
}

impl Widths {
    pub fn of(frames: &[FrameSummary], registry: &SchemaRegistry, local: bool) -> Self {
        let local_widths = || frames.iter().map(|f| f.width_attributes);
        Widths {
            local_min: if local { local_widths().min() } else { None },
            local_max: if local { local_widths().max() } else { None },
            global: RegistrySummary::global_attribute_width(registry),
        }
    }
}

/// Selection outcome for one frame.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FrameSelection {
    pub frame: String,
    /// Columns entering selection (after time conversion).
    pub input_columns: Vec<String>,
    pub kept: Vec<String>,
    pub dropped: Vec<DroppedColumn>,
    /// Input column → canonical name it was merged into.
    pub merged: BTreeMap<String, String>,
    pub correlated_pairs: Vec<CorrelatedPair>,
    pub chi_square: Option<ChiSquareResult>,
    pub importances: Vec<Importance>,
    pub index_dictionaries: Vec<IndexDictionary>,
    pub notes: Vec<String>,
}

impl FrameSelection {
    /// Whether every input column is kept, dropped or merged exactly once.
    pub fn is_accounted(&self) -> bool {
        let kept: BTreeSet<&str> = self.kept.iter().map(String::as_str).collect();
        let mut dropped: BTreeMap<&str, usize> = BTreeMap::new();
        for d in &self.dropped {
            *dropped.entry(d.column.as_str()).or_default() += 1;
        }
        if kept.len() != self.kept.len() || dropped.values().any(|&n| n > 1) {
            return false;
        }
        self.input_columns.iter().all(|c| {
            let c = c.as_str();
            usize::from(kept.contains(c))
                + usize::from(dropped.contains_key(c))
                + usize::from(self.merged.contains_key(c))
                == 1
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SelectionReport {
    pub frames: Vec<FrameSelection>,
    pub merge_candidates: Vec<MergeCandidate>,
    pub merges_applied: bool,
    pub merge_outcome: MergeOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub frame: String,
    pub path: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: PipelineConfig,
    pub ingest: IngestStats,
    /// Absent when selection runs over previously written frames.
    pub registry: Option<RegistrySummary>,
    pub frames: Vec<FrameSummary>,
    pub rejected_records: usize,
    pub widths: Option<Widths>,
    /// Old column name → canonical name, from applied merges.
    pub renames: BTreeMap<String, String>,
    pub selection: Option<SelectionReport>,
    pub outputs: Vec<OutputFile>,
    /// Wall-clock milliseconds per stage, in execution order.
    pub timings_ms: IndexMap<String, f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without timings, for run-to-run comparison.
    pub fn without_timings(&self) -> RunReport {
        RunReport {
            timings_ms: IndexMap::new(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InspectReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub ingest: IngestStats,
    pub registry: RegistrySummary,
    pub merge_candidates: Vec<MergeCandidate>,
}

impl InspectReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Columns the selection stages never drop.
pub(crate) fn is_protected(name: &str, label: Option<&str>) -> bool {
    name == SCHEMA_TYPE_COLUMN || Some(name) == label
}
