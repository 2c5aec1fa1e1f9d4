#![no_main]

use libfuzzer_sys::fuzz_target;
use logfeat::ingest::read_corpus;
use logfeat::ErrorPolicy;

fuzz_target!(|data: &[u8]| {
    if let Ok((records, stats)) = read_corpus(data, ErrorPolicy::Skip) {
        assert_eq!(records.len(), stats.records_ok);
    }
    let _ = read_corpus(data, ErrorPolicy::Abort);
});
