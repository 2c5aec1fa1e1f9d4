use std::collections::HashMap;

use indexmap::IndexMap;

use super::{flatten_record, FlatRow, FlattenConfig, FlattenError};
use crate::frame::{fill_nulls, Column, ColumnData, Frame};
use crate::par;
use crate::schema::{FieldPath, SchemaRegistry, SCHEMA_TYPE_COLUMN};
use crate::value::{Scalar, ValueNode};

/// Name of the frame holding records whose partition is not registered.
pub const REJECT_FRAME: &str = "reject";

/// Local-mode output.
#[derive(Debug, Clone)]
pub struct LocalFrames {
    /// One frame per registered partition, `schema_<i>` with `schemaType = i`.
    pub frames: Vec<Frame>,
    pub reject: Option<Frame>,
    pub rejected: usize,
    /// For every input record, `(frame index, row)`; `None` when rejected.
    pub placement: Vec<Option<(usize, usize)>>,
}

/// Splits the records by partition and builds one frame per partition.
pub fn partition_by_schema(
    records: &[ValueNode],
    registry: &SchemaRegistry,
    cfg: &FlattenConfig,
) -> Result<LocalFrames, FlattenError> {
    let flattened = par::ordered_map(records, cfg.workers, |record| {
        let digest = registry.partition_fingerprint(record).digest;
        flatten_record(record, registry, cfg).map(|row| (registry.partitions().index_of(&digest), row))
    });
    let partitions = registry.partitions().len();
    let mut groups: Vec<Vec<FlatRow>> = vec![Vec::new(); partitions];
    let mut rejects = Vec::new();
    let mut placement = Vec::with_capacity(records.len());
    for result in flattened {
        let (slot, row) = result?;
        match slot {
            Some(i) => {
                placement.push(Some((i, groups[i].len())));
                groups[i].push(row);
            }
            None => {
                placement.push(None);
                rejects.push(row);
            }
        }
    }
    let mut frames = Vec::with_capacity(partitions);
    for (i, rows) in groups.iter().enumerate() {
        let schema_type = Column::new(SCHEMA_TYPE_COLUMN, ColumnData::Int(vec![Some(i as i64); rows.len()]));
        let frame = assemble(format!("schema_{i}"), rows, registry, Some(schema_type))?;
        frames.push(fill_nulls(&frame, &cfg.null_fill));
    }
    if !rejects.is_empty() {
        log::warn!("{} record(s) match no registered partition", rejects.len());
    }
    let reject = if rejects.is_empty() {
        None
    } else {
        Some(fill_nulls(
            &assemble(REJECT_FRAME.into(), &rejects, registry, None)?,
            &cfg.null_fill,
        ))
    };
    Ok(LocalFrames {
        frames,
        reject,
        rejected: rejects.len(),
        placement,
    })
}

/// Builds one frame over all records with the union of their columns.
pub fn unify_global(
    records: &[ValueNode],
    registry: &SchemaRegistry,
    cfg: &FlattenConfig,
) -> Result<Frame, FlattenError> {
    let rows = par::ordered_map(records, cfg.workers, |record| flatten_record(record, registry, cfg))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let frame = assemble("global".into(), &rows, registry, None)?;
    Ok(fill_nulls(&frame, &cfg.null_fill))
}

/// Columns ordered by corpus-wide rank, then unregistered names in order of
/// first appearance.
fn assemble(
    name: String,
    rows: &[FlatRow],
    registry: &SchemaRegistry,
    leading: Option<Column>,
) -> Result<Frame, FlattenError> {
    let mut sources: IndexMap<&str, &FieldPath> = IndexMap::new();
    for row in rows {
        for (col, cell) in row.iter() {
            sources.entry(col).or_insert(&cell.source);
        }
    }
    let mut order: Vec<(&str, &FieldPath)> = sources.into_iter().collect();
    let fallback: HashMap<&str, usize> = order.iter().enumerate().map(|(i, (n, _))| (*n, i)).collect();
    order.sort_by_key(|(n, _)| match registry.column_rank(n) {
        Some(rank) => (0, rank),
        None => (1, fallback[n]),
    });
    let mut columns: Vec<Column> = leading.into_iter().collect();
    for (col, source) in order {
        let values: Vec<Scalar> = rows
            .iter()
            .map(|row| row.get(col).cloned().unwrap_or(Scalar::Null))
            .collect();
        columns.push(Column::new(col, ColumnData::from_scalars(&values)).with_source(Some(FieldPath::clone(source))));
    }
    Ok(Frame::new(name, rows.len(), columns)?)
}
