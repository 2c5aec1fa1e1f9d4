//! Schema-driven flattening of heterogeneous JSON event logs into columnar
//! feature tables, followed by dimensionality reduction.
//!
//! The crate is organised as a pipeline:
//!
//! * [`ingest`] parses JSON Lines into [`ValueNode`] trees.
//! * [`schema`] fingerprints records, classifies complex attributes and keeps
//!   the registry of distinct baseline structures.
//! * [`flatten`] turns records into flat rows and assembles them into frames,
//!   either one per baseline structure (local) or one wide frame (global).
//! * [`frame`] is the immutable columnar table with timestamp handling,
//!   categorical indexing, scaling and CSV / JSON Lines writers.
//! * [`select`] implements the feature-selection methods: single-value
//!   pruning, namespace merging, Pearson pruning, chi-square selection,
//!   category partitioning and tree/forest importance.
//! * [`pipeline`] wires everything together and produces the run report;
//!   [`corpus`] generates the seeded synthetic honeypot corpus.

pub mod corpus;
pub mod flatten;
pub mod frame;
pub mod ingest;
mod par;
pub mod pipeline;
pub mod schema;
pub mod select;
mod value;

pub use flatten::{FlatRow, FlattenConfig, FlattenError, Mode, NullFill};
pub use frame::{Column, ColumnData, ColumnKind, Frame, FrameError};
pub use ingest::{ErrorPolicy, IngestError, IngestStats};
pub use schema::{FieldClass, FieldPath, SchemaError, SchemaFingerprint, SchemaRegistry};
pub use value::{Scalar, ScalarKind, ValueNode};
