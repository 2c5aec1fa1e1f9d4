#![no_main]

use libfuzzer_sys::fuzz_target;
use logfeat::pipeline::OutputFormat;
use logfeat::select::ChiMode;
use logfeat::{ErrorPolicy, Mode, NullFill};

fuzz_target!(|text: &str| {
    if let Ok(mode) = text.parse::<ChiMode>() {
        assert_eq!(mode.to_string().parse::<ChiMode>().ok(), Some(mode));
    }
    if let Ok(fill) = text.parse::<NullFill>() {
        assert_eq!(fill.to_string().parse::<NullFill>().ok(), Some(fill));
    }
    let _ = text.parse::<Mode>();
    let _ = text.parse::<ErrorPolicy>();
    let _ = text.parse::<OutputFormat>();
});
