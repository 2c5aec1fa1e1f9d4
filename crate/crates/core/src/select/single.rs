use super::{DropReason, DroppedColumn};
use crate::frame::Frame;

/// Removes columns with at most one distinct non-null value.
pub fn drop_single_valued(frame: &Frame) -> (Frame, Vec<DroppedColumn>) {
    let dropped: Vec<DroppedColumn> = frame
        .columns()
        .iter()
        .filter_map(|c| {
            let reason = match c.data.distinct_count() {
                0 => DropReason::AllNull,
                1 => DropReason::SingleValued,
                _ => return None,
            };
            Some(DroppedColumn {
                column: c.name.clone(),
                reason,
            })
        })
        .collect();
    let names: Vec<&str> = dropped.iter().map(|d| d.column.as_str()).collect();
    (frame.drop_columns(&names), dropped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Column, ColumnData};

    #[test]
    fn reasons() {
        let frame = Frame::from_columns(
            "f",
            vec![
                Column::new("normalized", ColumnData::Bool(vec![Some(true), Some(true)])),
                Column::new("n", ColumnData::Int(vec![Some(1), Some(2)])),
                Column::new("z", ColumnData::Text(vec![None, None])),
            ],
        )
        .unwrap();
        let (kept, dropped) = drop_single_valued(&frame);
        assert_eq!(kept.column_names().collect::<Vec<_>>(), vec!["n"]);
        assert_eq!(dropped[0].reason, DropReason::SingleValued);
        assert_eq!(dropped[1].reason, DropReason::AllNull);
        let (again, none) = drop_single_valued(&kept);
        assert_eq!(again, kept);
        assert!(none.is_empty());
    }
}
