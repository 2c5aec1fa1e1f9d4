//! JSON Lines ingestion.
//!
//! Each non-blank line must hold one JSON object. Lines may end in LF or
//! CRLF. Malformed lines are either skipped and recorded in
//! [`IngestStats`], or abort the read, depending on [`ErrorPolicy`].

use std::io::{self, BufRead};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::value::ValueNode;

pub const DEFAULT_MAX_DEPTH: usize = 8;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed JSON: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: top-level value is {found}, expected an object")]
    NotAnObject { line: usize, found: &'static str },
    #[error("line {line}: nesting depth {depth} exceeds the limit of {max_depth}")]
    TooDeep {
        line: usize,
        depth: usize,
        max_depth: usize,
    },
    #[error("line {line}: not valid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
}

impl IngestError {
    /// Line the error refers to, if it is tied to a line.
    pub fn line(&self) -> Option<usize> {
        match self {
            IngestError::Malformed { line, .. }
            | IngestError::NotAnObject { line, .. }
            | IngestError::TooDeep { line, .. }
            | IngestError::InvalidUtf8 { line } => Some(*line),
            IngestError::Io(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorPolicy {
    #[default]
    Skip,
    Abort,
}

impl FromStr for ErrorPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "skip" => Ok(ErrorPolicy::Skip),
            "abort" => Ok(ErrorPolicy::Abort),
            other => Err(format!("unknown error policy `{other}` (expected skip or abort)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailedLine {
    pub line: usize,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub records_ok: usize,
    pub records_failed: usize,
    pub failed_lines: Vec<FailedLine>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadOptions {
    pub policy: ErrorPolicy,
    pub max_depth: usize,
    pub workers: usize,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions {
            policy: ErrorPolicy::Skip,
            max_depth: DEFAULT_MAX_DEPTH,
            workers: 1,
        }
    }
}

/// Parses one line into a record using the default depth limit.
pub fn parse_record(line: &str, line_number: usize) -> Result<ValueNode, IngestError> {
    parse_record_with_depth(line, line_number, DEFAULT_MAX_DEPTH)
}

pub fn parse_record_with_depth(line: &str, line_number: usize, max_depth: usize) -> Result<ValueNode, IngestError> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|err| IngestError::Malformed {
        line: line_number,
        message: err.to_string(),
    })?;
    let node = ValueNode::from_json(value);
    if !matches!(node, ValueNode::Object(_)) {
        return Err(IngestError::NotAnObject {
            line: line_number,
            found: node.kind_name(),
        });
    }
    let depth = node.depth();
    if depth > max_depth {
        return Err(IngestError::TooDeep {
            line: line_number,
            depth,
            max_depth,
        });
    }
    Ok(node)
}

/// Reads a whole JSON Lines stream with default options and the given policy.
pub fn read_corpus<R: BufRead>(source: R, policy: ErrorPolicy) -> Result<(Vec<ValueNode>, IngestStats), IngestError> {
    read_corpus_with(
        source,
        &ReadOptions {
            policy,
            ..ReadOptions::default()
        },
    )
}

pub fn read_corpus_with<R: BufRead>(
    mut source: R,
    opts: &ReadOptions,
) -> Result<(Vec<ValueNode>, IngestStats), IngestError> {
    let mut lines: Vec<(usize, Vec<u8>)> = Vec::new();
    let mut buf = Vec::new();
    let mut line_number = 0;
    loop {
        buf.clear();
        if source.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_number += 1;
        let mut end = buf.len();
        if end > 0 && buf[end - 1] == b'\n' {
            end -= 1;
        }
        if end > 0 && buf[end - 1] == b'\r' {
            end -= 1;
        }
        let content = &buf[..end];
        if content.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        lines.push((line_number, content.to_vec()));
    }

    let parsed = par::ordered_map(&lines, opts.workers, |(line, bytes)| {
        let text = std::str::from_utf8(bytes).map_err(|_| IngestError::InvalidUtf8 { line: *line })?;
        parse_record_with_depth(text, *line, opts.max_depth)
    });

    let mut records = Vec::with_capacity(parsed.len());
    let mut stats = IngestStats::default();
    for result in parsed {
        match result {
            Ok(node) => {
                records.push(node);
                stats.records_ok += 1;
            }
            Err(err) if opts.policy == ErrorPolicy::Abort => return Err(err),
            Err(err) => {
                log::debug!("skipping: {err}");
                stats.records_failed += 1;
                stats.failed_lines.push(FailedLine {
                    line: err.line().unwrap_or(0),
                    error: err.to_string(),
                });
            }
        }
    }
    Ok((records, stats))
}
