#![no_main]

use libfuzzer_sys::fuzz_target;
use logfeat::frame::csv;
use logfeat::ColumnKind;

const KINDS: [ColumnKind; 5] = [
    ColumnKind::Text,
    ColumnKind::Int,
    ColumnKind::Float,
    ColumnKind::Bool,
    ColumnKind::Timestamp,
];

// The first byte picks the kinds of up to three columns named a, b, c.
fuzz_target!(|data: &[u8]| {
    let Some((&selector, data)) = data.split_first() else {
        return;
    };
    let width = usize::from(selector % 3) + 1;
    let schema: Vec<(String, ColumnKind)> = (0..width)
        .map(|i| {
            let kind = KINDS[usize::from(selector >> (2 + i)) % KINDS.len()];
            (["a", "b", "c"][i].to_owned(), kind)
        })
        .collect();
    if let Ok(frame) = csv::read_csv(data, "f", &schema) {
        let mut bytes = Vec::new();
        csv::write_csv(&frame, &mut bytes).expect("frame writes");
        let back = csv::read_csv(bytes.as_slice(), "f", &schema).expect("written frame reads");
        assert_eq!(back, frame);
    }
});
