use super::{Column, ColumnData, Frame, FrameError};

/// Standardises a numeric column to `(x - mean) / s`, `s` the sample
/// standard deviation. Constant columns become all zeros.
pub fn zscale(frame: &Frame, column: &str) -> Result<Frame, FrameError> {
    let source = frame.require(column)?;
    if !source.kind().is_numeric() {
        return Err(FrameError::KindMismatch {
            column: column.to_owned(),
            expected: "int or float",
            found: source.kind(),
        });
    }
    let values = source.data.numeric().unwrap_or_default();
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(FrameError::NoValues(column.to_owned()));
    }
    let n = present.len() as f64;
    let mean = present.iter().sum::<f64>() / n;
    let sd = if present.len() > 1 {
        (present.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let scaled = values
        .iter()
        .map(|v| {
            v.map(|x| {
                if sd > 0.0 && sd.is_finite() {
                    (x - mean) / sd
                } else {
                    0.0
                }
            })
        })
        .collect();
    frame.replace_column(
        column,
        vec![Column {
            name: column.to_owned(),
            source: source.source.clone(),
            data: ColumnData::Float(scaled),
        }],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::ColumnKind;

    fn scaled(values: Vec<Option<i64>>) -> ColumnData {
        let frame = Frame::from_columns("f", vec![Column::new("x", ColumnData::Int(values))]).unwrap();
        zscale(&frame, "x").unwrap().require("x").unwrap().data.clone()
    }

    #[test]
    fn one_two_three() {
        assert_eq!(
            scaled(vec![Some(1), Some(2), Some(3)]),
            ColumnData::Float(vec![Some(-1.0), Some(0.0), Some(1.0)])
        );
    }

    #[test]
    fn constant_and_single_values_are_zero() {
        assert_eq!(
            scaled(vec![Some(5), Some(5), Some(5)]),
            ColumnData::Float(vec![Some(0.0); 3])
        );
        assert_eq!(scaled(vec![Some(7), None]), ColumnData::Float(vec![Some(0.0), None]));
    }

    #[test]
    fn errors() {
        let frame = Frame::from_columns(
            "f",
            vec![
                Column::new("t", ColumnData::Text(vec![Some("a".into())])),
                Column::new("n", ColumnData::nulls(ColumnKind::Float, 1)),
            ],
        )
        .unwrap();
        assert!(matches!(zscale(&frame, "t"), Err(FrameError::KindMismatch { .. })));
        assert!(matches!(zscale(&frame, "n"), Err(FrameError::NoValues(_))));
    }
}
