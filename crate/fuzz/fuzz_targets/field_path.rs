#![no_main]

use libfuzzer_sys::fuzz_target;
use logfeat::FieldPath;

fuzz_target!(|text: &str| {
    if let Some(path) = FieldPath::parse(text) {
        let rendered = path.to_string();
        assert_eq!(FieldPath::parse(&rendered), Some(path));
        let _ = FieldPath::parse(text).unwrap().column_base_name();
    }
});
