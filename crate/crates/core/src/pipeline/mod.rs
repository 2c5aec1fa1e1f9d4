//! End-to-end orchestration: ingest, registry, flattening, time conversion,
//! selection, output files and the run report.

mod config;
mod output;
mod report;
mod run;

use thiserror::Error;

pub use config::{MergeConfig, OutputFormat, PipelineConfig, TimestampConfig};
pub use output::{read_frames, write_frames, Manifest, ManifestColumn, ManifestFrame, MANIFEST_FILE};
pub use report::{
    attribute_of, ClassEntry, ColumnSummary, FrameSelection, FrameSummary, InspectReport, OutputFile, RegistrySummary,
    RunReport, SchemaSummary, SelectionReport, Widths,
};
pub use run::{inspect, inspect_records, run_flatten, run_pipeline, run_records, run_select, PipelineOutput, Stages};

pub const TOOL_NAME: &str = "logfeat";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Processing(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Input(_) => 2,
            PipelineError::Processing(_) => 3,
        }
    }
}

macro_rules! processing_from {
    ($($t:ty),*) => {
        $(impl From<$t> for PipelineError {
            fn from(err: $t) -> Self {
                PipelineError::Processing(err.to_string())
            }
        })*
    };
}

processing_from!(
    crate::schema::SchemaError,
    crate::flatten::FlattenError,
    crate::frame::FrameError,
    crate::select::SelectError
);
