use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use logfeat::corpus::{honeypot_templates, load_templates, write_corpus};
use logfeat::frame::TimestampFormat;
use logfeat::pipeline::{self, OutputFormat, PipelineConfig, PipelineError, PipelineOutput};
use logfeat::select::ChiMode;
use logfeat::{ErrorPolicy, Mode, NullFill};

#[derive(Parser)]
#[command(
    name = "logfeat",
    version,
    about = "Flatten heterogeneous JSON event logs into feature tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report schemas, field classes and merge candidates; writes no frames.
    Inspect(Common),
    /// Flatten and convert time columns.
    Flatten(Common),
    /// Run selection over frames written by `flatten`.
    Select {
        /// Directory holding the frames and their manifest.
        #[arg(long)]
        frames: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run every stage.
    Pipeline(Common),
    /// Write the seeded synthetic honeypot corpus as JSON Lines.
    GenCorpus {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        records_per_schema: usize,
        /// JSON template file; the built-in honeypot templates otherwise.
        #[arg(long)]
        templates: Option<PathBuf>,
        /// Output file; standard output otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct Common {
    /// JSON Lines input files.
    inputs: Vec<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    pearson_threshold: Option<f64>,
    /// numTopFeatures=k, percentile=f, fpr=a or fdr=q.
    #[arg(long)]
    chi: Option<ChiMode>,
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    strict_timestamps: bool,
    #[arg(long)]
    error_policy: Option<ErrorPolicy>,
    #[arg(long)]
    workers: Option<usize>,
    /// none, mean, median or sentinel=<value>.
    #[arg(long)]
    null_fill: Option<NullFill>,
    /// Extra timestamp format tried after the configured ones.
    #[arg(long = "timestamp-format")]
    timestamp_formats: Vec<TimestampFormat>,
    /// Column always converted as a timestamp.
    #[arg(long = "time-column")]
    time_columns: Vec<String>,
    #[arg(long)]
    max_categories: Option<usize>,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// String-index text columns before correlation pruning.
    #[arg(long)]
    index: bool,
    /// Z-scale numeric columns before correlation pruning.
    #[arg(long)]
    scale: bool,
    /// Report merge candidates without applying them.
    #[arg(long)]
    no_merge: bool,
    /// Skip the tree importance stage.
    #[arg(long)]
    no_importance: bool,
    /// Extra abbreviation table of `short=long` lines.
    #[arg(long)]
    abbreviations: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<PipelineConfig, PipelineError> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        if !self.inputs.is_empty() {
            cfg.inputs = self.inputs.clone();
        }
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = &self.out {
            cfg.out_dir = Some(v.clone());
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        if let Some(v) = &self.report {
            cfg.report = Some(v.clone());
        }
        if let Some(v) = self.pearson_threshold {
            cfg.select.pearson_threshold = v;
        }
        if let Some(v) = self.chi {
            cfg.select.chi_mode = Some(v);
        }
        if let Some(v) = &self.label {
            cfg.label = Some(v.clone());
        }
        if let Some(v) = self.seed {
            cfg.select.seed = v;
        }
        if self.strict_timestamps {
            cfg.timestamps.strict = true;
        }
        if let Some(v) = self.error_policy {
            cfg.error_policy = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = &self.null_fill {
            cfg.flatten.null_fill = v.clone();
        }
        cfg.timestamps.formats.extend(self.timestamp_formats.iter().cloned());
        cfg.timestamps.columns.extend(self.time_columns.iter().cloned());
        if let Some(v) = self.max_categories {
            cfg.select.max_categories = v;
        }
        if let Some(v) = self.n_trees {
            cfg.select.n_trees = v;
        }
        if let Some(v) = self.max_depth {
            cfg.select.max_depth = v;
        }
        if self.index {
            cfg.index = true;
        }
        if self.scale {
            cfg.scale = true;
        }
        if self.no_merge {
            cfg.merge.apply = false;
        }
        if self.no_importance {
            cfg.select.importance = false;
        }
        if let Some(v) = &self.abbreviations {
            cfg.merge.abbreviations = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn init_logging() {
    let filter = std::env::var("LOGFEAT_LOG")
        .or_else(|_| std::env::var("TOOL_LOG"))
        .unwrap_or_else(|_| "warn".into());
    env_logger::Builder::new()
        .parse_filters(&filter)
        .target(env_logger::Target::Stderr)
        .init();
}

fn emit(text: &str) -> Result<(), PipelineError> {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| PipelineError::Processing(format!("cannot write output: {e}")))
}

/// Prints the report when it is not written to a file.
fn finish(cfg: &PipelineConfig, output: PipelineOutput) -> Result<(), PipelineError> {
    let report = &output.report;
    if cfg.report_path().is_none() {
        emit(&report.to_json())?;
    }
    log::info!(
        "{} frame(s), {} output file(s)",
        output.frames.len(),
        report.outputs.len()
    );
    Ok(())
}

fn run(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Inspect(common) => {
            let cfg = common.config()?;
            let report = pipeline::inspect(&cfg)?;
            match &cfg.report {
                Some(path) => std::fs::write(path, report.to_json() + "\n")
                    .map_err(|e| PipelineError::Processing(format!("cannot write {}: {e}", path.display()))),
                None => emit(&report.to_json()),
            }
        }
        Command::Flatten(common) => {
            let cfg = common.config()?;
            let output = pipeline::run_flatten(&cfg)?;
            finish(&cfg, output)
        }
        Command::Pipeline(common) => {
            let cfg = common.config()?;
            let output = pipeline::run_pipeline(&cfg)?;
            finish(&cfg, output)
        }
        Command::Select { frames, mut common } => {
            if common.inputs.is_empty() {
                common.inputs.push(frames.clone());
            }
            let cfg = common.config()?;
            let output = pipeline::run_select(&cfg, &frames)?;
            finish(&cfg, output)
        }
        Command::GenCorpus {
            seed,
            records_per_schema,
            templates,
            out,
        } => {
            let templates = match templates {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| PipelineError::Input(format!("cannot read {}: {e}", path.display())))?;
                    load_templates(&text).map_err(|e| PipelineError::Input(e.to_string()))?
                }
                None => honeypot_templates(),
            };
            let written = match out {
                Some(path) => {
                    let file = File::create(&path)
                        .map_err(|e| PipelineError::Processing(format!("cannot write {}: {e}", path.display())))?;
                    write_corpus(&mut BufWriter::new(file), seed, records_per_schema, &templates)
                }
                None => write_corpus(
                    &mut BufWriter::new(io::stdout().lock()),
                    seed,
                    records_per_schema,
                    &templates,
                ),
            }
            .map_err(|e| PipelineError::Processing(e.to_string()))?;
            log::info!("wrote {written} record(s)");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    init_logging();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("logfeat: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
