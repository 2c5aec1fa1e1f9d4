use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::{self, File};
use std::io::BufReader;
use std::time::Instant;

use indexmap::IndexMap;

use super::report::is_protected;
use super::{
    attribute_of, write_frames, FrameSelection, FrameSummary, InspectReport, PipelineConfig, PipelineError,
    RegistrySummary, RunReport, SelectionReport, Widths, TOOL_NAME, VERSION,
};
use crate::flatten::{flatten_record, partition_by_schema, unify_global, Mode, NullFill};
use crate::frame::{convert_time_columns, fill_nulls, string_index, zscale, ColumnKind, Frame, TimestampParser};
use crate::ingest::{read_corpus_with, IngestStats, ReadOptions};
use crate::schema::{SchemaRegistry, SCHEMA_TYPE_COLUMN};
use crate::select::{
    apply_merges, chi_square_select, drop_single_valued, forest_importance, pearson_matrix_with,
    propose_namespace_merges, prune_by_correlation, pseudo_label_importances, tree_importance, AbbreviationTable,
    DropReason, DroppedColumn, MergeCandidate, SelectError,
};
use crate::value::{Scalar, ValueNode};

/// How far a run goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stages {
    /// Flatten and convert time columns only.
    Flatten,
    /// Everything, including selection.
    Full,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: RunReport,
    /// Frames as written.
    pub frames: Vec<Frame>,
}

struct Timer {
    timings: IndexMap<String, f64>,
}

impl Timer {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        *self.timings.entry(name.to_owned()).or_default() += ms;
        log::info!("stage {name}: {ms:.1} ms");
        out
    }
}

fn load_inputs(cfg: &PipelineConfig) -> Result<(Vec<ValueNode>, IngestStats), PipelineError> {
    let opts = ReadOptions {
        policy: cfg.error_policy,
        max_depth: cfg.flatten.max_depth,
        workers: cfg.workers,
    };
    let mut records = Vec::new();
    let mut stats = IngestStats::default();
    for path in &cfg.inputs {
        let file =
            File::open(path).map_err(|e| PipelineError::Input(format!("cannot open {}: {e}", path.display())))?;
        let (mut recs, s) = read_corpus_with(BufReader::new(file), &opts)
            .map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))?;
        records.append(&mut recs);
        stats.records_ok += s.records_ok;
        stats.records_failed += s.records_failed;
        stats.failed_lines.extend(s.failed_lines);
    }
    if records.is_empty() {
        return Err(PipelineError::Input("input contains no records".into()));
    }
    Ok((records, stats))
}

fn abbreviations(cfg: &PipelineConfig) -> Result<AbbreviationTable, PipelineError> {
    let mut table = AbbreviationTable::default();
    if let Some(path) = &cfg.merge.abbreviations {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        table
            .extend_from(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    }
    Ok(table)
}

/// Reads the configured inputs and runs every stage.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    run_from_inputs(cfg, Stages::Full, "pipeline")
}

/// Reads the configured inputs and stops after time conversion.
pub fn run_flatten(cfg: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    run_from_inputs(cfg, Stages::Flatten, "flatten")
}

fn run_from_inputs(cfg: &PipelineConfig, stages: Stages, command: &str) -> Result<PipelineOutput, PipelineError> {
    cfg.validate()?;
    let table = abbreviations(cfg)?;
    let mut timer = Timer {
        timings: IndexMap::new(),
    };
    let (records, stats) = timer.stage("ingest", || load_inputs(cfg))?;
    execute(cfg, &records, stats, stages, command, &table, timer)
}

/// Runs the stages over records already in memory; nothing is read from
/// `cfg.inputs`, which need not be set.
pub fn run_records(
    cfg: &PipelineConfig,
    records: &[ValueNode],
    stats: IngestStats,
    stages: Stages,
) -> Result<PipelineOutput, PipelineError> {
    let mut checked = cfg.clone();
    if checked.inputs.is_empty() {
        checked.inputs.push("<memory>".into());
    }
    checked.validate()?;
    if records.is_empty() {
        return Err(PipelineError::Input("input contains no records".into()));
    }
    let table = abbreviations(cfg)?;
    let timer = Timer {
        timings: IndexMap::new(),
    };
    let command = match stages {
        Stages::Flatten => "flatten",
        Stages::Full => "pipeline",
    };
    execute(cfg, records, stats, stages, command, &table, timer)
}

fn execute(
    cfg: &PipelineConfig,
    records: &[ValueNode],
    stats: IngestStats,
    stages: Stages,
    command: &str,
    table: &AbbreviationTable,
    mut timer: Timer,
) -> Result<PipelineOutput, PipelineError> {
    let fcfg = cfg.flatten_config();
    let registry = timer.stage("registry", || {
        SchemaRegistry::build_with(records, &fcfg.registry_config())
    })?;
    log::info!(
        "{} record(s), {} schema(s), {} partition(s)",
        records.len(),
        registry.len(),
        registry.partitions().len()
    );
    let unfilled = crate::flatten::FlattenConfig {
        null_fill: NullFill::None,
        ..fcfg.clone()
    };
    let (frames, rejected) = timer.stage("flatten", || -> Result<_, PipelineError> {
        Ok(match cfg.mode {
            Mode::Local => {
                let local = partition_by_schema(records, &registry, &unfilled)?;
                let mut frames = local.frames;
                frames.extend(local.reject);
                (frames, local.rejected)
            }
            Mode::Global => (vec![unify_global(records, &registry, &unfilled)?], 0),
        })
    })?;
    let mut summaries: Vec<FrameSummary> = frames.iter().map(FrameSummary::of_flattened).collect();
    let widths = Widths::of(&summaries, &registry, cfg.mode == Mode::Local);

    let parser = TimestampParser {
        formats: cfg.timestamps.formats.clone(),
        strict: cfg.timestamps.strict,
    };
    let frames = timer.stage("time", || -> Result<Vec<Frame>, PipelineError> {
        let mut out = Vec::with_capacity(frames.len());
        for (frame, summary) in frames.iter().zip(summaries.iter_mut()) {
            let (converted, conversions) = convert_time_columns(frame, &parser, &cfg.timestamps.columns)?;
            summary.time_conversions = conversions;
            out.push(fill_nulls(&converted, &cfg.flatten.null_fill));
        }
        Ok(out)
    })?;

    let (frames, selection) = match stages {
        Stages::Flatten => (frames, None),
        Stages::Full => {
            let (frames, selection) = select_stages(cfg, frames, table, &mut timer)?;
            (frames, Some(selection))
        }
    };
    for (summary, frame) in summaries.iter_mut().zip(&frames) {
        summary.output_columns = frame.column_names().map(str::to_owned).collect();
    }
    let renames = selection
        .as_ref()
        .map(|s| s.merge_outcome.renames.clone())
        .unwrap_or_default();
    let report = RunReport {
        tool: TOOL_NAME,
        version: VERSION,
        command: command.to_owned(),
        config: cfg.clone(),
        ingest: stats,
        registry: Some(RegistrySummary::of(&registry)),
        frames: summaries,
        rejected_records: rejected,
        widths: Some(widths),
        renames,
        selection,
        outputs: Vec::new(),
        timings_ms: IndexMap::new(),
    };
    finish(cfg, report, frames, timer)
}

/// Runs the selection stages over frames written by an earlier `flatten`.
pub fn run_select(cfg: &PipelineConfig, frames_dir: &std::path::Path) -> Result<PipelineOutput, PipelineError> {
    let mut checked = cfg.clone();
    if checked.inputs.is_empty() {
        checked.inputs.push(frames_dir.to_path_buf());
    }
    checked.validate()?;
    let table = abbreviations(cfg)?;
    let mut timer = Timer {
        timings: IndexMap::new(),
    };
    let frames = timer.stage("load", || super::read_frames(frames_dir))?;
    let mut summaries: Vec<FrameSummary> = frames.iter().map(FrameSummary::of_flattened).collect();
    let (frames, selection) = select_stages(cfg, frames, &table, &mut timer)?;
    for (summary, frame) in summaries.iter_mut().zip(&frames) {
        summary.output_columns = frame.column_names().map(str::to_owned).collect();
    }
    let report = RunReport {
        tool: TOOL_NAME,
        version: VERSION,
        command: "select".into(),
        config: checked,
        ingest: IngestStats::default(),
        registry: None,
        frames: summaries,
        rejected_records: 0,
        widths: None,
        renames: selection.merge_outcome.renames.clone(),
        selection: Some(selection),
        outputs: Vec::new(),
        timings_ms: IndexMap::new(),
    };
    finish(cfg, report, frames, timer)
}

fn finish(
    cfg: &PipelineConfig,
    mut report: RunReport,
    frames: Vec<Frame>,
    mut timer: Timer,
) -> Result<PipelineOutput, PipelineError> {
    if let Some(dir) = &cfg.out_dir {
        report.outputs = timer.stage("write", || write_frames(&frames, dir, cfg.format))?;
    }
    report.timings_ms = timer.timings;
    if let Some(path) = cfg.report_path() {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)
                .map_err(|e| PipelineError::Processing(format!("cannot write {}: {e}", parent.display())))?;
        }
        fs::write(&path, report.to_json() + "\n")
            .map_err(|e| PipelineError::Processing(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(PipelineOutput { report, frames })
}

fn select_stages(
    cfg: &PipelineConfig,
    frames: Vec<Frame>,
    table: &AbbreviationTable,
    timer: &mut Timer,
) -> Result<(Vec<Frame>, SelectionReport), PipelineError> {
    let label = cfg.label.as_deref();
    let mut selections: Vec<FrameSelection> = frames
        .iter()
        .map(|f| FrameSelection {
            frame: f.name().to_owned(),
            input_columns: f.column_names().map(str::to_owned).collect(),
            ..FrameSelection::default()
        })
        .collect();

    let frames: Vec<Frame> = timer.stage("single_value", || {
        frames
            .iter()
            .zip(selections.iter_mut())
            .map(|(frame, sel)| {
                let (_, dropped) = drop_single_valued(frame);
                let dropped: Vec<DroppedColumn> = dropped
                    .into_iter()
                    .filter(|d| !is_protected(&d.column, label))
                    .collect();
                let names: Vec<&str> = dropped.iter().map(|d| d.column.as_str()).collect();
                let out = frame.drop_columns(&names);
                sel.dropped.extend(dropped);
                out
            })
            .collect()
    });

    let (frames, candidates, outcome) = timer.stage("namespace", || {
        let candidates = merge_candidates(&frames, table, cfg.flatten.sample_size, label);
        if !cfg.merge.apply || candidates.is_empty() {
            return (frames, candidates, Default::default());
        }
        let (merged, outcome) = apply_merges(&frames, &candidates);
        for (frame, sel) in frames.iter().zip(selections.iter_mut()) {
            for name in frame.column_names() {
                if let Some(canon) = outcome.renames.get(name) {
                    sel.merged.insert(name.to_owned(), canon.clone());
                }
            }
        }
        (merged, candidates, outcome)
    });

    let mut frames = timer.stage("index_scale", || -> Result<Vec<Frame>, PipelineError> {
        let mut out = Vec::with_capacity(frames.len());
        for (mut frame, sel) in frames.into_iter().zip(selections.iter_mut()) {
            if cfg.index {
                let texts: Vec<String> = frame
                    .columns()
                    .iter()
                    .filter(|c| c.kind() == ColumnKind::Text && !is_protected(&c.name, label))
                    .map(|c| c.name.clone())
                    .collect();
                for name in texts {
                    let (indexed, dictionary) = string_index(&frame, &name)?;
                    frame = indexed;
                    sel.index_dictionaries.push(dictionary);
                }
            }
            if cfg.scale {
                let numeric: Vec<String> = frame
                    .columns()
                    .iter()
                    .filter(|c| c.kind().is_numeric() && !is_protected(&c.name, label))
                    .map(|c| c.name.clone())
                    .collect();
                for name in numeric {
                    frame = zscale(&frame, &name)?;
                }
            }
            out.push(frame);
        }
        Ok(out)
    })?;

    frames = timer.stage("pearson", || -> Result<Vec<Frame>, PipelineError> {
        let mut out = Vec::with_capacity(frames.len());
        for (frame, sel) in frames.iter().zip(selections.iter_mut()) {
            let numeric: Vec<&str> = frame
                .columns()
                .iter()
                .filter(|c| c.kind().is_numeric() && !is_protected(&c.name, label))
                .map(|c| c.name.as_str())
                .collect();
            let matrix = pearson_matrix_with(frame, &numeric, cfg.workers)?;
            let pruned = prune_by_correlation(&matrix, cfg.select.pearson_threshold);
            let names: Vec<&str> = pruned.dropped.iter().map(|d| d.column.as_str()).collect();
            out.push(frame.drop_columns(&names));
            sel.correlated_pairs = pruned.pairs;
            sel.dropped.extend(pruned.dropped);
        }
        Ok(out)
    })?;

    if let (Some(label), Some(mode)) = (label, cfg.select.chi_mode) {
        frames = timer.stage("chi_square", || -> Result<Vec<Frame>, PipelineError> {
            let mut out = Vec::with_capacity(frames.len());
            for (frame, sel) in frames.iter().zip(selections.iter_mut()) {
                if frame.column(label).is_none() {
                    sel.notes.push(format!("chi-square skipped: no column `{label}`"));
                    out.push(frame.clone());
                    continue;
                }
                let indexed: HashSet<&str> = sel.index_dictionaries.iter().map(|d| d.column.as_str()).collect();
                let features: Vec<&str> = frame
                    .columns()
                    .iter()
                    .filter(|c| !is_protected(&c.name, Some(label)))
                    .filter(|c| {
                        matches!(c.kind(), ColumnKind::Text | ColumnKind::Bool) || indexed.contains(c.name.as_str())
                    })
                    .map(|c| c.name.as_str())
                    .collect();
                if features.is_empty() {
                    sel.notes.push("chi-square skipped: no categorical features".into());
                    out.push(frame.clone());
                    continue;
                }
                match chi_square_select(frame, &features, label, &mode) {
                    Ok(result) => {
                        let chosen: BTreeSet<&str> = result.selected.iter().map(String::as_str).collect();
                        let rejected: Vec<&str> = features.iter().copied().filter(|f| !chosen.contains(f)).collect();
                        sel.dropped.extend(rejected.iter().map(|f| DroppedColumn {
                            column: (*f).to_owned(),
                            reason: DropReason::NotSelectedChi,
                        }));
                        out.push(frame.drop_columns(&rejected));
                        sel.chi_square = Some(result);
                    }
                    Err(SelectError::ConstantLabel(_)) => {
                        sel.notes.push(format!("chi-square skipped: `{label}` is constant"));
                        out.push(frame.clone());
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(out)
        })?;
    }

    if cfg.select.importance {
        let tree_cfg = cfg.select.tree_config(cfg.workers);
        timer.stage("importance", || -> Result<(), PipelineError> {
            for (frame, sel) in frames.iter().zip(selections.iter_mut()) {
                let features: Vec<&str> = frame.column_names().filter(|n| !is_protected(n, label)).collect();
                match label.filter(|l| frame.column(l).is_some()) {
                    Some(label) => {
                        for result in [
                            tree_importance(frame, &features, label, &tree_cfg),
                            forest_importance(frame, &features, label, &tree_cfg),
                        ] {
                            match result {
                                Ok(imp) => sel.importances.push(imp),
                                Err(e @ (SelectError::ConstantLabel(_) | SelectError::NoFeatures)) => {
                                    sel.notes.push(format!("importance skipped: {e}"));
                                    break;
                                }
                                Err(e) => return Err(e.into()),
                            }
                        }
                    }
                    None => {
                        let view = frame.drop_columns(&[SCHEMA_TYPE_COLUMN]);
                        sel.importances = pseudo_label_importances(&view, cfg.select.max_categories, &tree_cfg)?;
                    }
                }
            }
            Ok(())
        })?;
    }

    for (frame, sel) in frames.iter().zip(selections.iter_mut()) {
        sel.kept = frame.column_names().map(str::to_owned).collect();
        debug_assert!(sel.is_accounted(), "unaccounted columns in {}", sel.frame);
    }
    Ok((
        frames,
        SelectionReport {
            frames: selections,
            merge_candidates: candidates,
            merges_applied: cfg.merge.apply,
            merge_outcome: outcome,
        },
    ))
}

/// Candidates over the text columns of all frames. Columns derived from the
/// same source attribute (list slots, split parts) are never paired.
fn merge_candidates(
    frames: &[Frame],
    table: &AbbreviationTable,
    sample_size: usize,
    label: Option<&str>,
) -> Vec<MergeCandidate> {
    let mut values: IndexMap<String, (BTreeSet<String>, String)> = IndexMap::new();
    for frame in frames {
        for column in frame.columns() {
            if column.kind() != ColumnKind::Text || is_protected(&column.name, label) {
                continue;
            }
            let entry = values
                .entry(column.name.clone())
                .or_insert_with(|| (BTreeSet::new(), attribute_of(column)));
            let rows = frame.row_count().min(sample_size);
            entry.0.extend((0..rows).filter_map(|r| column.data.key(r)));
        }
    }
    candidates_from(values, table)
}

fn candidates_from(
    values: IndexMap<String, (BTreeSet<String>, String)>,
    table: &AbbreviationTable,
) -> Vec<MergeCandidate> {
    let attributes: BTreeMap<String, String> = values.iter().map(|(n, (_, a))| (n.clone(), a.clone())).collect();
    let columns: Vec<(String, BTreeSet<String>)> = values.into_iter().map(|(n, (v, _))| (n, v)).collect();
    propose_namespace_merges(&columns, table)
        .into_iter()
        .filter(|c| attributes[&c.left] != attributes[&c.right])
        .collect()
}

/// Registry and merge candidates for the configured inputs; writes nothing.
pub fn inspect(cfg: &PipelineConfig) -> Result<InspectReport, PipelineError> {
    cfg.validate()?;
    let table = abbreviations(cfg)?;
    let (records, stats) = load_inputs(cfg)?;
    inspect_records(cfg, &records, stats, &table)
}

/// Value access is limited to classification samples and the first
/// `sample_size` text values per column for merge overlap.
pub fn inspect_records(
    cfg: &PipelineConfig,
    records: &[ValueNode],
    stats: IngestStats,
    table: &AbbreviationTable,
) -> Result<InspectReport, PipelineError> {
    let fcfg = cfg.flatten_config();
    let registry = SchemaRegistry::build_with(records, &fcfg.registry_config())?;
    let mut values: IndexMap<String, (BTreeSet<String>, String, usize)> = IndexMap::new();
    for record in records {
        let row = flatten_record(record, &registry, &fcfg)?;
        for (name, cell) in row.iter() {
            let Scalar::Text(text) = &cell.value else { continue };
            let entry = values
                .entry(name.to_owned())
                .or_insert_with(|| (BTreeSet::new(), cell.source.attribute().to_string(), 0));
            if entry.2 < fcfg.sample_size {
                entry.0.insert(text.clone());
                entry.2 += 1;
            }
        }
    }
    let values = values.into_iter().map(|(n, (v, a, _))| (n, (v, a))).collect();
    Ok(InspectReport {
        tool: TOOL_NAME,
        version: VERSION,
        ingest: stats,
        registry: RegistrySummary::of(&registry),
        merge_candidates: candidates_from(values, table),
    })
}
