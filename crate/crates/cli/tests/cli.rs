use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn logfeat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logfeat"))
        .args(args)
        .env_remove("LOGFEAT_LOG")
        .env_remove("TOOL_LOG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn corpus(dir: &TempDir, per_schema: usize) -> PathBuf {
    let path = dir.path().join("corpus.jsonl");
    let out = logfeat(&[
        "gen-corpus",
        "--records-per-schema",
        &per_schema.to_string(),
        "--out",
        path_str(&path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

const EVENTS: &str = r#"{"id":"5776664eb3c585471bf1bb5","@timestamp":"2016-07-01T14:48:37.839108389+02:00","honeypot":"19","payloadCommand":""}
{"id":"57b309abb3c585471bf4d920","@timestamp":"2016-08-16T14:43:23.40957412+02:00","honeypot":"19","payloadCommand":""}
{"id":"57ddf76fb3c585471bf7b514","@timestamp":"2016-09-18T04:14:16.533762285+02:00","honeypot":"19","payloadCommand":"wget"}
{"id":"57dfe3f2b3c585471bf7e90b","@timestamp":"2016-09-19T15:15:42.293763881+02:00","honeypot":"19","payloadCommand":"curl"}
"#;

#[test]
fn empty_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let out = logfeat(&["pipeline", path_str(&empty), "--out", path_str(&dir.path().join("out"))]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no records"));
}

#[test]
fn unreadable_path_exits_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.jsonl");
    assert_eq!(code(&logfeat(&["inspect", path_str(&missing)])), 2);
}

#[test]
fn usage_and_config_errors_exit_1() {
    assert_eq!(code(&logfeat(&["pipeline", "--no-such-flag"])), 1);
    assert_eq!(code(&logfeat(&["pipeline", "x.jsonl", "--mode", "sideways"])), 1);
    assert_eq!(code(&logfeat(&["pipeline", "x.jsonl", "--workers", "0"])), 1);
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"inputs":["x.jsonl"],"colour":"blue"}"#).unwrap();
    assert_eq!(code(&logfeat(&["pipeline", "--config", path_str(&cfg)])), 1);
    assert_eq!(code(&logfeat(&["--help"])), 0);
    assert_eq!(code(&logfeat(&["--version"])), 0);
}

#[test]
fn processing_error_exits_3() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("events.jsonl");
    fs::write(&input, EVENTS).unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = logfeat(&["flatten", path_str(&input), "--out", path_str(&blocker.join("sub"))]);
    assert_eq!(code(&out), 3);
}

#[test]
fn gen_corpus_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for path in [&a, &b] {
        let out = logfeat(&[
            "gen-corpus",
            "--seed",
            "42",
            "--records-per-schema",
            "100",
            "--out",
            path_str(path),
        ]);
        assert_eq!(code(&out), 0);
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    assert_eq!(text.iter().filter(|&&c| c == b'\n').count(), 1300);
    let stdout = logfeat(&["gen-corpus", "--seed", "42", "--records-per-schema", "100"]);
    assert_eq!(stdout.stdout, text);
}

#[test]
fn gen_corpus_single_template_single_record() {
    let dir = TempDir::new().unwrap();
    let templates = dir.path().join("templates.json");
    fs::write(
        &templates,
        r#"[{"channel":"demo.events","fields":["src_ip","dst_port"]}]"#,
    )
    .unwrap();
    let out = logfeat(&[
        "gen-corpus",
        "--records-per-schema",
        "1",
        "--templates",
        path_str(&templates),
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    let record: Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(record["channel"], "demo.events");
    assert_eq!(record["normalized"], true);
    assert!(record["payload"]["src_ip"].is_string());
}

#[test]
fn inspect_reports_one_schema_with_four_fields_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("events.jsonl");
    fs::write(&input, EVENTS).unwrap();
    let out = logfeat(&["inspect", path_str(&input)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let schemas = report["registry"]["schemas"].as_array().unwrap();
    assert_eq!(schemas.len(), 1);
    assert_eq!(schemas[0]["records"], 4);
    assert_eq!(schemas[0]["fields"].as_array().unwrap().len(), 4);
    assert_eq!(listing(dir.path()), vec!["events.jsonl"]);
}

#[test]
fn inspect_lists_protocol_merge_candidate() {
    let dir = TempDir::new().unwrap();
    let input = corpus(&dir, 50);
    let out = logfeat(&["inspect", path_str(&input)]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let candidates = report["merge_candidates"].as_array().unwrap();
    assert!(
        candidates.iter().any(|c| {
            let text = c.to_string();
            text.contains("payload_proto") && text.contains("payload_connection_protocol")
        }),
        "{candidates:?}"
    );
    assert_eq!(listing(dir.path()), vec!["corpus.jsonl"]);
}

#[test]
fn local_pipeline_writes_thirteen_frames_and_report() {
    let dir = TempDir::new().unwrap();
    let input = corpus(&dir, 60);
    let out_dir = dir.path().join("out");
    let out = logfeat(&["pipeline", path_str(&input), "--out", path_str(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let files = listing(&out_dir);
    assert_eq!(files.iter().filter(|f| f.ends_with(".csv")).count(), 13);
    assert!(files.contains(&"frames.json".to_owned()));
    let report = report(&out_dir.join("report.json"));
    assert_eq!(report["registry"]["partition_count"], 13);
    assert_eq!(report["frames"].as_array().unwrap().len(), 13);
    assert_eq!(report["command"], "pipeline");
    let dropped: Vec<String> = report["selection"]["frames"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|f| f["dropped"].as_array().unwrap().iter().map(|d| d.to_string()))
        .collect();
    assert!(dropped.iter().filter(|d| d.contains("\"normalized\"")).count() >= 13);
}

#[test]
fn global_pipeline_writes_one_frame() {
    let dir = TempDir::new().unwrap();
    let input = corpus(&dir, 20);
    let out_dir = dir.path().join("out");
    let out = logfeat(&[
        "flatten",
        path_str(&input),
        "--mode",
        "global",
        "--format",
        "jsonl",
        "--out",
        path_str(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(listing(&out_dir), vec!["frames.json", "global.jsonl", "report.json"]);
    let rows = fs::read_to_string(out_dir.join("global.jsonl"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 13 * 20);
}

#[test]
fn repeated_runs_are_identical_apart_from_timings() {
    let dir = TempDir::new().unwrap();
    let input = corpus(&dir, 30);
    let mut runs = Vec::new();
    for name in ["one", "two"] {
        let out_dir = dir.path().join(name);
        let out = logfeat(&["pipeline", path_str(&input), "--out", path_str(&out_dir), "--seed", "7"]);
        assert_eq!(code(&out), 0);
        let mut report = report(&out_dir.join("report.json"));
        let obj = report.as_object_mut().unwrap();
        obj.remove("timings_ms");
        obj.remove("config");
        obj.remove("outputs");
        let frames: Vec<Vec<u8>> = listing(&out_dir)
            .iter()
            .filter(|f| f.ends_with(".csv"))
            .map(|f| fs::read(out_dir.join(f)).unwrap())
            .collect();
        runs.push((report, frames));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn flatten_then_select_over_written_frames() {
    let dir = TempDir::new().unwrap();
    let input = corpus(&dir, 40);
    let flat = dir.path().join("flat");
    let out = logfeat(&["flatten", path_str(&input), "--out", path_str(&flat)]);
    assert_eq!(code(&out), 0);
    let selected = dir.path().join("selected");
    let out = logfeat(&["select", "--frames", path_str(&flat), "--out", path_str(&selected)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = report(&selected.join("report.json"));
    assert_eq!(report["command"], "select");
    let frames = report["selection"]["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 13);
    for frame in frames {
        let dropped = frame["dropped"].as_array().unwrap();
        assert!(dropped.iter().any(|d| d.to_string().contains("\"normalized\"")));
    }
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("events.jsonl");
    fs::write(&input, EVENTS).unwrap();
    let cfg = dir.path().join("cfg.json");
    let out_dir = dir.path().join("out");
    let config = serde_json::json!({
        "inputs": [path_str(&input)],
        "mode": "local",
        "format": "csv",
        "out_dir": path_str(&out_dir),
    });
    fs::write(&cfg, config.to_string()).unwrap();
    let out = logfeat(&["flatten", "--config", path_str(&cfg), "--format", "jsonl"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(listing(&out_dir).contains(&"schema_0.jsonl".to_owned()));
}
