#![no_main]

use libfuzzer_sys::fuzz_target;
use logfeat::ingest::parse_record;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(record) = parse_record(line, 1) {
        let again = parse_record(&record.to_string(), 1).expect("rendered record parses");
        assert!(again.eq_ordered(&record));
    }
});
