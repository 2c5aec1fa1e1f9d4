//! RFC 4180 CSV output and schema-driven input.
//!
//! Null cells are written as empty unquoted fields; empty text is written as
//! `""` so the two stay distinguishable on the way back in.

use std::io::{Read, Write};

use chrono::{DateTime, Utc};

use super::{format_instant, Column, ColumnData, ColumnKind, Frame, FrameError};
use crate::value::format_float;

/// `(name, kind)` for every column, in order.
pub fn schema_of(frame: &Frame) -> Vec<(String, ColumnKind)> {
    frame.columns().iter().map(|c| (c.name.clone(), c.kind())).collect()
}

/// Writes the frame with a header row and LF line endings; returns the
/// number of bytes written.
pub fn write_csv<W: Write>(frame: &Frame, sink: &mut W) -> Result<u64, FrameError> {
    let mut written = 0u64;
    let mut line = String::new();
    for (i, name) in frame.column_names().enumerate() {
        if i > 0 {
            line.push(',');
        }
        push_text(&mut line, name);
    }
    line.push('\n');
    sink.write_all(line.as_bytes())?;
    written += line.len() as u64;
    for row in 0..frame.row_count() {
        line.clear();
        for (i, column) in frame.columns().iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            push_cell(&mut line, &column.data, row);
        }
        line.push('\n');
        sink.write_all(line.as_bytes())?;
        written += line.len() as u64;
    }
    sink.flush()?;
    Ok(written)
}

fn push_cell(line: &mut String, data: &ColumnData, row: usize) {
    match data {
        ColumnData::Text(v) => {
            if let Some(s) = &v[row] {
                push_text(line, s);
            }
        }
        ColumnData::Int(v) => {
            if let Some(i) = v[row] {
                line.push_str(&i.to_string());
            }
        }
        ColumnData::Float(v) => {
            if let Some(f) = v[row] {
                line.push_str(&format_float(f));
            }
        }
        ColumnData::Bool(v) => {
            if let Some(b) = v[row] {
                line.push_str(if b { "true" } else { "false" });
            }
        }
        ColumnData::Timestamp(v) => {
            if let Some(t) = &v[row] {
                line.push_str(&format_instant(t));
            }
        }
    }
}

fn push_text(line: &mut String, s: &str) {
    if s.is_empty() || s.contains([',', '"', '\n', '\r']) {
        line.push('"');
        line.push_str(&s.replace('"', "\"\""));
        line.push('"');
    } else {
        line.push_str(s);
    }
}

struct Field {
    text: String,
    quoted: bool,
}

/// Splits CSV text into records of fields. CRLF is accepted as a line end.
fn parse_records(input: &str) -> Result<Vec<Vec<Field>>, FrameError> {
    let mut records = Vec::new();
    let mut record = Vec::new();
    let mut field = Field {
        text: String::new(),
        quoted: false,
    };
    let mut chars = input.chars().peekable();
    let mut line = 1;
    let mut at_field_start = true;
    while let Some(c) = chars.next() {
        match c {
            '"' if at_field_start => {
                field.quoted = true;
                loop {
                    match chars.next() {
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            field.text.push('"');
                        }
                        Some('"') => break,
                        Some(ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            field.text.push(ch);
                        }
                        None => {
                            return Err(FrameError::Parse {
                                line,
                                message: "unterminated quoted field".into(),
                            })
                        }
                    }
                }
                at_field_start = false;
                match chars.peek() {
                    None | Some(',') | Some('\n') => {}
                    Some('\r') => {}
                    Some(other) => {
                        return Err(FrameError::Parse {
                            line,
                            message: format!("unexpected `{other}` after closing quote"),
                        })
                    }
                }
            }
            '"' => {
                return Err(FrameError::Parse {
                    line,
                    message: "quote inside unquoted field".into(),
                })
            }
            ',' => {
                record.push(std::mem::replace(
                    &mut field,
                    Field {
                        text: String::new(),
                        quoted: false,
                    },
                ));
                at_field_start = true;
            }
            '\r' if chars.peek() == Some(&'\n') => {}
            '\n' => {
                record.push(std::mem::replace(
                    &mut field,
                    Field {
                        text: String::new(),
                        quoted: false,
                    },
                ));
                records.push(std::mem::take(&mut record));
                at_field_start = true;
                line += 1;
            }
            other => {
                if field.quoted {
                    return Err(FrameError::Parse {
                        line,
                        message: "text after quoted field".into(),
                    });
                }
                field.text.push(other);
                at_field_start = false;
            }
        }
    }
    if !at_field_start || !record.is_empty() || field.quoted {
        record.push(field);
        records.push(record);
    }
    Ok(records)
}

/// Reads CSV written by [`write_csv`]. The header must list exactly the
/// schema's column names in order.
pub fn read_csv<R: Read>(mut source: R, name: &str, schema: &[(String, ColumnKind)]) -> Result<Frame, FrameError> {
    let mut input = String::new();
    source.read_to_string(&mut input).map_err(|e| match e.kind() {
        std::io::ErrorKind::InvalidData => FrameError::Parse {
            line: 0,
            message: "input is not valid UTF-8".into(),
        },
        _ => FrameError::Io(e),
    })?;
    let mut records = parse_records(&input)?.into_iter();
    let header = records.next().ok_or_else(|| FrameError::Parse {
        line: 1,
        message: "missing header row".into(),
    })?;
    let header_names: Vec<&str> = header.iter().map(|f| f.text.as_str()).collect();
    let expected: Vec<&str> = if schema.is_empty() {
        vec![""]
    } else {
        schema.iter().map(|(n, _)| n.as_str()).collect()
    };
    if header_names != expected {
        return Err(FrameError::Parse {
            line: 1,
            message: format!("header {header_names:?} does not match schema {expected:?}"),
        });
    }
    let mut columns: Vec<ColumnData> = schema.iter().map(|(_, k)| ColumnData::nulls(*k, 0)).collect();
    let mut rows = 0;
    for (i, record) in records.enumerate() {
        let line = i + 2;
        if record.len() != expected.len() {
            return Err(FrameError::Parse {
                line,
                message: format!("expected {} fields, found {}", expected.len(), record.len()),
            });
        }
        for (data, field) in columns.iter_mut().zip(&record) {
            push_field(data, field, line)?;
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

fn push_field(data: &mut ColumnData, field: &Field, line: usize) -> Result<(), FrameError> {
    let bad = |kind: &str| FrameError::Parse {
        line,
        message: format!("`{}` is not a valid {kind}", field.text),
    };
    let null = field.text.is_empty() && !field.quoted;
    match data {
        ColumnData::Text(v) => v.push((!null).then(|| field.text.clone())),
        _ if field.text.is_empty() => match data {
            ColumnData::Int(v) => v.push(None),
            ColumnData::Float(v) => v.push(None),
            ColumnData::Bool(v) => v.push(None),
            ColumnData::Timestamp(v) => v.push(None),
            ColumnData::Text(_) => unreachable!(),
        },
        ColumnData::Int(v) => v.push(Some(field.text.parse().map_err(|_| bad("int"))?)),
        ColumnData::Float(v) => v.push(Some(field.text.parse().map_err(|_| bad("float"))?)),
        ColumnData::Bool(v) => v.push(Some(match field.text.as_str() {
            "true" => true,
            "false" => false,
            _ => return Err(bad("bool")),
        })),
        ColumnData::Timestamp(v) => v.push(Some(
            DateTime::parse_from_rfc3339(&field.text)
                .map_err(|_| bad("timestamp"))?
                .with_timezone(&Utc),
        )),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_string(frame: &Frame) -> String {
        let mut buf = Vec::new();
        let n = write_csv(frame, &mut buf).unwrap();
        assert_eq!(n as usize, buf.len());
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn single_cell() {
        let f = Frame::from_columns("f", vec![Column::new("a", ColumnData::Int(vec![Some(1)]))]).unwrap();
        assert_eq!(to_string(&f), "a\n1\n");
    }

    #[test]
    fn nulls_and_empty_text_differ() {
        let f = Frame::from_columns(
            "f",
            vec![
                Column::new(
                    "s",
                    ColumnData::Text(vec![None, Some(String::new()), Some("a,\"b\"\nc".into())]),
                ),
                Column::new("x", ColumnData::Float(vec![Some(0.1), None, Some(-0.0)])),
            ],
        )
        .unwrap();
        let text = to_string(&f);
        assert_eq!(text, "s,x\n,0.1\n\"\",\n\"a,\"\"b\"\"\nc\",-0.0\n");
        let back = read_csv(text.as_bytes(), "f", &schema_of(&f)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn crlf_and_errors() {
        let schema = vec![("a".to_owned(), ColumnKind::Int)];
        let f = read_csv("a\r\n1\r\n".as_bytes(), "f", &schema).unwrap();
        assert_eq!(f.row_count(), 1);
        assert!(read_csv("b\n1\n".as_bytes(), "f", &schema).is_err());
        assert!(read_csv("a\nx\n".as_bytes(), "f", &schema).is_err());
        assert!(read_csv("a\n\"1\n".as_bytes(), "f", &schema).is_err());
    }
}
