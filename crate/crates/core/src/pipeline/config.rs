use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::flatten::{FlattenConfig, Mode};
use crate::frame::TimestampFormat;
use crate::ingest::ErrorPolicy;
use crate::select::SelectConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Jsonl => "jsonl",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimestampConfig {
    /// Tried in order; the first that parses wins.
    pub formats: Vec<TimestampFormat>,
    /// Abort on an unparseable value instead of writing null.
    pub strict: bool,
    /// Columns converted regardless of auto-detection.
    pub columns: Vec<String>,
}

impl Default for TimestampConfig {
    fn default() -> Self {
        TimestampConfig {
            formats: TimestampFormat::defaults(),
            strict: false,
            columns: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MergeConfig {
    /// Apply proposed merges; when false they are only reported.
    pub apply: bool,
    /// Extra `short=long` entries on top of the built-in table.
    pub abbreviations: Option<PathBuf>,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig {
            apply: true,
            abbreviations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub mode: Mode,
    pub error_policy: ErrorPolicy,
    pub workers: usize,
    pub flatten: FlattenConfig,
    pub timestamps: TimestampConfig,
    pub merge: MergeConfig,
    /// String-index text columns before correlation pruning.
    pub index: bool,
    /// Z-scale numeric columns before correlation pruning.
    pub scale: bool,
    pub label: Option<String>,
    pub select: SelectConfig,
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
    /// Defaults to `report.json` in `out_dir`.
    pub report: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Vec::new(),
            mode: Mode::Local,
            error_policy: ErrorPolicy::Skip,
            workers: 1,
            flatten: FlattenConfig::default(),
            timestamps: TimestampConfig::default(),
            merge: MergeConfig::default(),
            index: false,
            scale: false,
            label: None,
            select: SelectConfig::default(),
            out_dir: None,
            format: OutputFormat::Csv,
            report: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Config(format!("invalid config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks everything that can be checked without touching the input.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::Config(m));
        if self.inputs.is_empty() {
            return fail("no input given".into());
        }
        if self.workers == 0 {
            return fail("workers must be at least 1".into());
        }
        if self.flatten.max_depth == 0 {
            return fail("flatten.max_depth must be at least 1".into());
        }
        if self.flatten.sample_size == 0 {
            return fail("flatten.sample_size must be at least 1".into());
        }
        if self.timestamps.formats.is_empty() {
            return fail("timestamps.formats must not be empty".into());
        }
        if self.label.as_deref() == Some("") {
            return fail("label must not be empty".into());
        }
        if self.select.chi_mode.is_some() && self.label.is_none() {
            return fail("chi_mode needs a label column".into());
        }
        self.select.validate().map_err(PipelineError::Config)
    }

    /// Flatten settings with the pipeline's mode and worker count.
    pub fn flatten_config(&self) -> FlattenConfig {
        FlattenConfig {
            mode: self.mode,
            workers: self.workers,
            ..self.flatten.clone()
        }
    }

    pub fn report_path(&self) -> Option<PathBuf> {
        self.report
            .clone()
            .or_else(|| self.out_dir.as_ref().map(|d| d.join("report.json")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::select::ChiMode;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(PipelineConfig::from_json(r#"{"inputs":["a"],"bogus":1}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"select":{"pearson":0.5}}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"flatten":{"mode":"global"}}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = PipelineConfig {
            inputs: vec!["x.jsonl".into()],
            mode: Mode::Global,
            label: Some("y".into()),
            select: SelectConfig {
                chi_mode: Some(ChiMode::Fdr(0.05)),
                ..SelectConfig::default()
            },
            ..PipelineConfig::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(PipelineConfig::from_json(&json).unwrap(), cfg);
        cfg.validate().unwrap();
    }

    #[test]
    fn validation() {
        assert!(PipelineConfig::default().validate().is_err());
        let mut cfg = PipelineConfig {
            inputs: vec!["x".into()],
            ..PipelineConfig::default()
        };
        cfg.validate().unwrap();
        cfg.select.chi_mode = Some(ChiMode::NumTopFeatures(2));
        assert!(cfg.validate().is_err());
        cfg.select.chi_mode = None;
        cfg.select.pearson_threshold = 0.0;
        assert!(cfg.validate().is_err());
    }
}
