//! Per-record schema inference, complex-field classification and the
//! registry of distinct baseline structures.

mod classify;
mod fingerprint;
mod path;
mod registry;

use thiserror::Error;

pub use classify::{classify_field, classify_with, ClassOverrides, FieldClass, CANDIDATE_DELIMITERS};
pub use fingerprint::{fingerprint, fingerprint_subtrees, FingerprintEntry, SchemaFingerprint};
pub use path::{Container, FieldPath, Segment};
pub use registry::{
    ClassTable, NamedColumn, RegistryConfig, SchemaCounts, SchemaEntry, SchemaRegistry, DEFAULT_SAMPLE_SIZE,
    SCHEMA_TYPE_COLUMN,
};

pub(crate) use path::column_base_name;
pub(crate) use registry::unique_name;

use crate::value::ValueNode;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("conflicting value kinds at `{path}`: {first} in some records, {second} in others")]
    ClassConflict {
        path: String,
        first: &'static str,
        second: &'static str,
    },
}

/// Builds a registry over `records` with default settings.
pub fn build_registry(records: &[ValueNode]) -> Result<SchemaRegistry, SchemaError> {
    SchemaRegistry::build(records)
}
