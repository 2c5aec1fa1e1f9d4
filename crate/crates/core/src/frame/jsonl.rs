//! JSON Lines output (one object per row, nulls omitted) and
//! schema-driven input.

use std::io::{BufRead, Write};

use chrono::{DateTime, Utc};
use serde_json::{Map, Number, Value};

use super::{format_instant, Column, ColumnData, ColumnKind, Frame, FrameError};

pub fn write_jsonl<W: Write>(frame: &Frame, sink: &mut W) -> Result<u64, FrameError> {
    let mut written = 0u64;
    for row in 0..frame.row_count() {
        let mut object = Map::new();
        for column in frame.columns() {
            if let Some(value) = cell_json(&column.data, row) {
                object.insert(column.name.clone(), value);
            }
        }
        let mut line = serde_json::to_string(&Value::Object(object)).map_err(std::io::Error::from)?;
        line.push('\n');
        sink.write_all(line.as_bytes())?;
        written += line.len() as u64;
    }
    sink.flush()?;
    Ok(written)
}

fn cell_json(data: &ColumnData, row: usize) -> Option<Value> {
    Some(match data {
        ColumnData::Text(v) => Value::String(v[row].clone()?),
        ColumnData::Int(v) => Value::from(v[row]?),
        ColumnData::Float(v) => {
            let f = v[row]?;
            Number::from_f64(f).map_or_else(|| Value::String(crate::value::format_float(f)), Value::Number)
        }
        ColumnData::Bool(v) => Value::Bool(v[row]?),
        ColumnData::Timestamp(v) => Value::String(format_instant(&v[row]?)),
    })
}

/// Reads rows written by [`write_jsonl`]. Keys outside the schema are an
/// error; absent keys are nulls. Blank lines are skipped.
pub fn read_jsonl<R: BufRead>(source: R, name: &str, schema: &[(String, ColumnKind)]) -> Result<Frame, FrameError> {
    let mut columns: Vec<ColumnData> = schema.iter().map(|(_, k)| ColumnData::nulls(*k, 0)).collect();
    let mut rows = 0;
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => FrameError::Parse {
                line: line_no,
                message: "line is not valid UTF-8".into(),
            },
            _ => FrameError::Io(e),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| FrameError::Parse { line: line_no, message };
        let Value::Object(mut object) = serde_json::from_str::<Value>(&line).map_err(|e| parse_err(e.to_string()))?
        else {
            return Err(parse_err("row is not a JSON object".into()));
        };
        for ((col_name, _), data) in schema.iter().zip(columns.iter_mut()) {
            let value = object.remove(col_name).unwrap_or(Value::Null);
            push_value(data, value).map_err(|m| parse_err(format!("column `{col_name}`: {m}")))?;
        }
        if let Some(key) = object.keys().next() {
            return Err(parse_err(format!("unknown column `{key}`")));
        }
        rows += 1;
    }
    let columns = schema
        .iter()
        .zip(columns)
        .map(|((n, _), data)| Column::new(n.clone(), data))
        .collect();
    Frame::new(name, rows, columns)
}

fn push_value(data: &mut ColumnData, value: Value) -> Result<(), String> {
    let bad = |value: &Value, kind: &str| format!("{value} is not a valid {kind}");
    match (data, value) {
        (ColumnData::Text(v), Value::Null) => v.push(None),
        (ColumnData::Int(v), Value::Null) => v.push(None),
        (ColumnData::Float(v), Value::Null) => v.push(None),
        (ColumnData::Bool(v), Value::Null) => v.push(None),
        (ColumnData::Timestamp(v), Value::Null) => v.push(None),
        (ColumnData::Text(v), Value::String(s)) => v.push(Some(s)),
        (ColumnData::Int(v), value) => v.push(Some(value.as_i64().ok_or_else(|| bad(&value, "int"))?)),
        (ColumnData::Float(v), Value::String(s)) => {
            let f: f64 = s.parse().map_err(|_| bad(&Value::String(s.clone()), "float"))?;
            if f.is_finite() {
                return Err(bad(&Value::String(s), "float"));
            }
            v.push(Some(f));
        }
        (ColumnData::Float(v), value) => v.push(Some(value.as_f64().ok_or_else(|| bad(&value, "float"))?)),
        (ColumnData::Bool(v), value) => v.push(Some(value.as_bool().ok_or_else(|| bad(&value, "bool"))?)),
        (ColumnData::Timestamp(v), Value::String(s)) => v.push(Some(
            DateTime::parse_from_rfc3339(&s)
                .map_err(|_| bad(&Value::String(s.clone()), "timestamp"))?
                .with_timezone(&Utc),
        )),
        (data, value) => return Err(bad(&value, data.kind().name())),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::csv::schema_of;

    #[test]
    fn nulls_are_omitted_and_round_trip() {
        let t = DateTime::parse_from_rfc3339("2016-07-01T12:48:37.839108389Z")
            .unwrap()
            .with_timezone(&Utc);
        let f = Frame::from_columns(
            "f",
            vec![
                Column::new("s", ColumnData::Text(vec![Some("a".into()), None])),
                Column::new("x", ColumnData::Float(vec![Some(1.0), Some(f64::NAN)])),
                Column::new("t", ColumnData::Timestamp(vec![None, Some(t)])),
                Column::new("b", ColumnData::Bool(vec![Some(true), None])),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_jsonl(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"s\":\"a\",\"x\":1.0,\"b\":true}\n{\"x\":\"NaN\",\"t\":\"2016-07-01T12:48:37.839108389Z\"}\n"
        );
        let back = read_jsonl(text.as_bytes(), "f", &schema_of(&f)).unwrap();
        assert_eq!(back.row_count(), 2);
        assert_eq!(back.columns()[0], f.columns()[0]);
        assert_eq!(back.columns()[2], f.columns()[2]);
        let ColumnData::Float(x) = &back.columns()[1].data else {
            panic!()
        };
        assert!(x[1].unwrap().is_nan());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let schema = vec![("a".to_owned(), ColumnKind::Int)];
        assert!(read_jsonl("{\"b\":1}\n".as_bytes(), "f", &schema).is_err());
        assert!(read_jsonl("[1]\n".as_bytes(), "f", &schema).is_err());
        assert_eq!(read_jsonl("{}\n\n".as_bytes(), "f", &schema).unwrap().row_count(), 1);
    }
}
