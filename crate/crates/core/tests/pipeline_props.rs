mod common;

use proptest::prelude::*;

use logfeat::corpus::{generate_corpus, honeypot_templates};
use logfeat::frame::csv;
use logfeat::pipeline::{run_records, PipelineConfig, Stages};
use logfeat::select::ChiMode;
use logfeat::{IngestStats, Mode, ValueNode};

fn stats(records: &[ValueNode]) -> IngestStats {
    IngestStats {
        records_ok: records.len(),
        ..IngestStats::default()
    }
}

fn csv_bytes(frames: &[logfeat::Frame]) -> Vec<Vec<u8>> {
    frames
        .iter()
        .map(|f| {
            let mut bytes = Vec::new();
            csv::write_csv(f, &mut bytes).unwrap();
            bytes
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn runs_are_reproducible_and_fully_accounted(
        seed in any::<u64>(),
        families in 1usize..5,
        n in 2usize..80,
        global in any::<bool>(),
        workers in 1usize..4,
    ) {
        let records = common::random_records(seed, families, n);
        let cfg = PipelineConfig {
            mode: if global { Mode::Global } else { Mode::Local },
            ..PipelineConfig::default()
        };
        let first = run_records(&cfg, &records, stats(&records), Stages::Full).unwrap();
        let second = run_records(&PipelineConfig { workers, ..cfg.clone() }, &records, stats(&records), Stages::Full).unwrap();
        prop_assert_eq!(csv_bytes(&first.frames), csv_bytes(&second.frames));
        let mut a = first.report.without_timings();
        let mut b = second.report.without_timings();
        a.config.workers = 1;
        b.config.workers = 1;
        prop_assert_eq!(a.to_json(), b.to_json());
        for selection in &first.report.selection.as_ref().unwrap().frames {
            prop_assert!(selection.is_accounted(), "{:?}", selection);
        }
        prop_assert!(first.report.timings_ms.values().all(|&ms| ms >= 0.0));
    }
}

#[test]
fn labelled_corpus_run_is_reproducible() {
    let records = generate_corpus(11, 40, &honeypot_templates());
    let mut cfg = PipelineConfig {
        label: Some("channel".into()),
        ..PipelineConfig::default()
    };
    cfg.select.chi_mode = Some(ChiMode::NumTopFeatures(3));
    let first = run_records(&cfg, &records, stats(&records), Stages::Full).unwrap();
    let second = run_records(&cfg, &records, stats(&records), Stages::Full).unwrap();
    assert_eq!(csv_bytes(&first.frames), csv_bytes(&second.frames));
    assert_eq!(
        first.report.without_timings().to_json(),
        second.report.without_timings().to_json()
    );
    let selection = first.report.selection.unwrap();
    assert!(selection.frames.iter().all(|f| f.is_accounted()));
}
