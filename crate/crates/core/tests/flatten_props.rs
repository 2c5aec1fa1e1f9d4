mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use logfeat::flatten::{flatten_record, partition_by_schema, reconstruct, unify_global};
use logfeat::ingest::parse_record;
use logfeat::schema::{fingerprint, Container, Segment};
use logfeat::{FieldPath, FlattenConfig, Mode, SchemaRegistry, ValueNode};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn segment() -> impl Strategy<Value = Segment> {
    prop_oneof![
        "[a-z.$@\\[{<\\\\ ]{0,6}".prop_map(Segment::Key),
        (0usize..20).prop_map(Segment::Index),
        Just(Segment::AnyIndex),
        (0usize..9, prop::sample::select(vec![':', ',', ';', '|']))
            .prop_map(|(index, delimiter)| Segment::Part { index, delimiter }),
    ]
}

fn field_path() -> impl Strategy<Value = FieldPath> {
    (
        prop::collection::vec(segment(), 1..6),
        prop::option::of(prop::bool::ANY),
    )
        .prop_map(|(mut segments, empty)| {
            if !matches!(segments[0], Segment::Key(_)) {
                segments.insert(0, Segment::Key("root".into()));
            }
            if let Some(object) = empty {
                segments.push(Segment::Empty(if object {
                    Container::Object
                } else {
                    Container::Array
                }));
            }
            FieldPath::from_segments(segments)
        })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn field_paths_render_and_parse_back(path in field_path()) {
        prop_assert_eq!(FieldPath::parse(&path.to_string()), Some(path));
    }

    #[test]
    fn flatten_then_reconstruct_is_identity(seed in any::<u64>(), families in 1usize..6, n in 1usize..80) {
        let records = common::random_records(seed, families, n);
        let registry = SchemaRegistry::build(&records).unwrap();
        let cfg = FlattenConfig::default();
        for record in &records {
            let row = flatten_record(record, &registry, &cfg).unwrap();
            let back = reconstruct(&row, &fingerprint(record)).unwrap();
            prop_assert!(back.eq_ordered(record), "{} != {}", back, record);
        }
    }

    #[test]
    fn fingerprint_survives_reserialization(seed in any::<u64>()) {
        let records = common::random_records(seed, 1, 2);
        let a = fingerprint(&records[0]);
        let text = records[0].to_string();
        let reparsed = parse_record(&text, 1).unwrap();
        prop_assert_eq!(&fingerprint(&reparsed), &a);
    }

    #[test]
    fn local_frames_partition_the_records(seed in any::<u64>(), families in 1usize..6, n in 1usize..120) {
        let records = common::random_records(seed, families, n);
        let registry = SchemaRegistry::build(&records).unwrap();
        let local = partition_by_schema(&records, &registry, &FlattenConfig::default()).unwrap();
        prop_assert_eq!(local.rejected, 0);
        prop_assert_eq!(local.frames.len(), registry.partitions().len());
        let rows: usize = local.frames.iter().map(|f| f.row_count()).sum();
        prop_assert_eq!(rows, records.len());
        let mut seen = HashSet::new();
        for slot in &local.placement {
            prop_assert!(seen.insert(slot.unwrap()));
        }
        for (i, entry) in registry.partitions().iter().enumerate() {
            prop_assert_eq!(local.frames[i].row_count(), entry.count);
        }
    }

    #[test]
    fn local_cells_agree_with_the_global_frame(seed in any::<u64>(), families in 1usize..5, n in 1usize..60) {
        let records = common::random_records(seed, families, n);
        let registry = SchemaRegistry::build(&records).unwrap();
        let cfg = FlattenConfig::default();
        let local = partition_by_schema(&records, &registry, &cfg).unwrap();
        let global = unify_global(&records, &registry, &FlattenConfig { mode: Mode::Global, ..cfg }).unwrap();
        prop_assert_eq!(global.row_count(), records.len());
        for (record, slot) in local.placement.iter().enumerate() {
            let (frame, row) = slot.unwrap();
            let frame = &local.frames[frame];
            for column in frame.columns().iter().skip(1) {
                let wide = global.require(&column.name).unwrap();
                let a = column.data.scalar(row).render();
                let b = wide.data.scalar(record).render();
                prop_assert_eq!(a, b, "column {}", &column.name);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_frames(seed in any::<u64>(), workers in 2usize..5) {
        let records = common::random_records(seed, 4, 90);
        let registry = SchemaRegistry::build(&records).unwrap();
        let one = partition_by_schema(&records, &registry, &FlattenConfig::default()).unwrap();
        let many = partition_by_schema(&records, &registry, &FlattenConfig { workers, ..FlattenConfig::default() }).unwrap();
        prop_assert_eq!(one.frames, many.frames);
    }
}

#[test]
fn generated_records_stay_shallow() {
    let records = common::random_records(3, 8, 500);
    assert!(records.iter().all(|r| r.depth() <= 4));
    assert!(records.iter().all(|r| matches!(r, ValueNode::Object(_))));
}
