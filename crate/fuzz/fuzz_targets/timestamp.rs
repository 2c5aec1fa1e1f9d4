#![no_main]

use libfuzzer_sys::fuzz_target;
use logfeat::frame::{decompose_time, parse_timestamp, TimestampFormat};

// `format\nvalue`; without a newline the whole input is a value.
fuzz_target!(|text: &str| {
    let (format, value) = text.split_once('\n').unwrap_or(("rfc3339_fraction", text));
    if let Some(instant) = parse_timestamp(value) {
        let _ = decompose_time(&instant);
    }
    if let Ok(format) = format.parse::<TimestampFormat>() {
        assert_eq!(format.to_string().parse::<TimestampFormat>().as_ref(), Ok(&format));
        if let Some(instant) = format.parse(value) {
            let _ = decompose_time(&instant);
        }
    }
});
