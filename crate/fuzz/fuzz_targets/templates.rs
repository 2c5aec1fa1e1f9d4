#![no_main]

use libfuzzer_sys::fuzz_target;
use logfeat::corpus::{generate_corpus, load_templates};

fuzz_target!(|text: &str| {
    if let Ok(templates) = load_templates(text) {
        if templates.len() <= 16 && templates.iter().all(|t| t.fields.len() <= 64) {
            let records = generate_corpus(0, 2, &templates);
            assert_eq!(records.len(), 2 * templates.len());
        }
    }
});
