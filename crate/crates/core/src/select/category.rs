use super::SelectError;
use crate::frame::{Column, ColumnData, Frame};
use crate::schema::unique_name;

pub const DEFAULT_MAX_CATEGORIES: usize = 4;

/// One binarised frame for a category subset `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct CategorySubset {
    /// Members of `S`, sorted.
    pub members: Vec<String>,
    /// `{a,b}` rendering of the subset.
    pub label: String,
    pub frame: Frame,
}

/// Emits one frame per non-empty proper subset `S` of the column's
/// categories (2^n − 2 frames). Each frame replaces the column by `in_S`:
/// 1 when the row's category is in `S`, 0 otherwise, null when the category
/// is null.
pub fn partition_by_category(
    frame: &Frame,
    column: &str,
    max_categories: usize,
) -> Result<Vec<CategorySubset>, SelectError> {
    let source = frame.require(column)?;
    let keys = source.data.keys();
    let mut categories: Vec<&str> = keys.iter().flatten().map(String::as_str).collect();
    categories.sort_unstable();
    categories.dedup();
    let n = categories.len();
    if n > max_categories {
        return Err(SelectError::TooManyCategories {
            column: column.to_owned(),
            found: n,
            max: max_categories,
        });
    }
    if n < 2 {
        return Ok(Vec::new());
    }
    let codes: Vec<Option<usize>> = keys
        .iter()
        .map(|k| {
            k.as_deref()
                .map(|k| categories.binary_search(&k).expect("category was collected"))
        })
        .collect();
    let at = frame.position(column).expect("column exists");
    let flag_name = unique_name("in_S", |c| c != column && frame.column(c).is_some());
    let mut out = Vec::with_capacity((1 << n) - 2);
    for mask in 1u32..(1u32 << n) - 1 {
        let members: Vec<String> = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| categories[i].to_owned())
            .collect();
        let flags = codes
            .iter()
            .map(|c| c.map(|c| i64::from(mask & (1 << c) != 0)))
            .collect();
        let mut columns: Vec<Column> = frame.columns().to_vec();
        columns[at] = Column {
            name: flag_name.clone(),
            source: source.source.clone(),
            data: ColumnData::Int(flags),
        };
        let label = format!("{{{}}}", members.join(","));
        let sub = Frame::new(
            format!("{}_{}_{}", frame.name(), column, mask),
            frame.row_count(),
            columns,
        )?;
        out.push(CategorySubset {
            members,
            label,
            frame: sub,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(values: &[Option<&str>]) -> Frame {
        Frame::from_columns(
            "f",
            vec![
                Column::new(
                    "p",
                    ColumnData::Text(values.iter().map(|v| v.map(str::to_owned)).collect()),
                ),
                Column::new("n", ColumnData::Int(vec![Some(0); values.len()])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_categories_two_frames() {
        let subsets = partition_by_category(&frame(&[Some("udp"), Some("tcp"), None]), "p", 4).unwrap();
        let labels: Vec<&str> = subsets.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, vec!["{tcp}", "{udp}"]);
        assert_eq!(
            subsets[0].frame.require("in_S").unwrap().data,
            ColumnData::Int(vec![Some(0), Some(1), None])
        );
        assert!(subsets[0].frame.column("p").is_none());
    }

    #[test]
    fn counts_and_refusal() {
        assert_eq!(
            partition_by_category(&frame(&[Some("a"), Some("b"), Some("c")]), "p", 4)
                .unwrap()
                .len(),
            6
        );
        assert!(partition_by_category(&frame(&[Some("a")]), "p", 4).unwrap().is_empty());
        let five = frame(&[Some("a"), Some("b"), Some("c"), Some("d"), Some("e")]);
        let err = partition_by_category(&five, "p", 4).unwrap_err();
        assert!(err.to_string().contains("max_categories"), "{err}");
    }
}
