use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{OutputFile, OutputFormat, PipelineError};
use crate::frame::{csv, jsonl, Column, ColumnKind, Frame};
use crate::schema::FieldPath;

/// Lists the frames written to an output directory.
pub const MANIFEST_FILE: &str = "frames.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestColumn {
    pub name: String,
    pub kind: ColumnKind,
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFrame {
    pub name: String,
    pub file: String,
    pub rows: usize,
    pub columns: Vec<ManifestColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: OutputFormat,
    pub frames: Vec<ManifestFrame>,
}

fn output_error(path: &Path, err: impl std::fmt::Display) -> PipelineError {
    PipelineError::Processing(format!("cannot write {}: {err}", path.display()))
}

/// Writes one file per frame plus the manifest.
pub fn write_frames(frames: &[Frame], dir: &Path, format: OutputFormat) -> Result<Vec<OutputFile>, PipelineError> {
    fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
    let mut outputs = Vec::with_capacity(frames.len());
    let mut manifest = Manifest {
        format,
        frames: Vec::with_capacity(frames.len()),
    };
    for frame in frames {
        let file = format!("{}.{}", frame.name(), format.extension());
        let path = dir.join(&file);
        let mut sink = BufWriter::new(File::create(&path).map_err(|e| output_error(&path, e))?);
        let bytes = match format {
            OutputFormat::Csv => csv::write_csv(frame, &mut sink),
            OutputFormat::Jsonl => jsonl::write_jsonl(frame, &mut sink),
        }
        .map_err(|e| output_error(&path, e))?;
        sink.flush().map_err(|e| output_error(&path, e))?;
        outputs.push(OutputFile {
            frame: frame.name().to_owned(),
            path: path.display().to_string(),
            bytes,
        });
        manifest.frames.push(ManifestFrame {
            name: frame.name().to_owned(),
            file,
            rows: frame.row_count(),
            columns: frame
                .columns()
                .iter()
                .map(|c| ManifestColumn {
                    name: c.name.clone(),
                    kind: c.kind(),
                    source: c.source.as_ref().map(|p| p.to_string()),
                })
                .collect(),
        });
    }
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| output_error(&path, e))?;
    Ok(outputs)
}

/// Reads back the frames listed in a directory's manifest.
pub fn read_frames(dir: &Path) -> Result<Vec<Frame>, PipelineError> {
    let input_error = |path: &Path, err: &dyn std::fmt::Display| {
        PipelineError::Input(format!("cannot read {}: {err}", path.display()))
    };
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| input_error(&path, &e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| input_error(&path, &e))?;
    let mut frames = Vec::with_capacity(manifest.frames.len());
    for entry in &manifest.frames {
        let path = dir.join(&entry.file);
        let schema: Vec<(String, ColumnKind)> = entry.columns.iter().map(|c| (c.name.clone(), c.kind)).collect();
        let file = File::open(&path).map_err(|e| input_error(&path, &e))?;
        let frame = match manifest.format {
            OutputFormat::Csv => csv::read_csv(BufReader::new(file), &entry.name, &schema),
            OutputFormat::Jsonl => jsonl::read_jsonl(BufReader::new(file), &entry.name, &schema),
        }
        .map_err(|e| input_error(&path, &e))?;
        let columns: Vec<Column> = frame
            .into_columns()
            .into_iter()
            .zip(&entry.columns)
            .map(|(column, meta)| {
                let source = meta.source.as_deref().and_then(FieldPath::parse);
                column.with_source(source)
            })
            .collect();
        frames.push(Frame::new(entry.name.clone(), entry.rows, columns).map_err(|e| input_error(&path, &e))?);
    }
    Ok(frames)
}
