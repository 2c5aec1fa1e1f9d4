//! Timestamp parsing and decomposition into calendar windows (UTC).

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDateTime, Timelike, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Column, ColumnData, Frame, FrameError};
use crate::schema::unique_name;

const DEFAULT_PATTERN: &str = "%Y-%m-%d %H:%M:%S";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimestampFormat {
    /// RFC 3339 with fractional seconds, e.g. `2016-07-01T14:48:37.839108389+02:00`.
    Rfc3339Fraction,
    /// RFC 3339 without fractional seconds.
    Rfc3339,
    /// `strftime`-style pattern without offset, read as UTC.
    Pattern(String),
    /// Integer seconds since the epoch, up to 11 digits.
    EpochSeconds,
    /// Integer milliseconds since the epoch, 12 to 14 digits.
    EpochMillis,
}

impl TimestampFormat {
    pub fn defaults() -> Vec<TimestampFormat> {
        vec![
            TimestampFormat::Rfc3339Fraction,
            TimestampFormat::Rfc3339,
            TimestampFormat::Pattern(DEFAULT_PATTERN.to_owned()),
            TimestampFormat::EpochSeconds,
            TimestampFormat::EpochMillis,
        ]
    }

    pub fn is_epoch(&self) -> bool {
        matches!(self, TimestampFormat::EpochSeconds | TimestampFormat::EpochMillis)
    }

    pub fn parse(&self, value: &str) -> Option<DateTime<Utc>> {
        match self {
            TimestampFormat::Rfc3339Fraction => {
                if value.as_bytes().get(19) != Some(&b'.') {
                    return None;
                }
                DateTime::parse_from_rfc3339(value).ok().map(|t| t.with_timezone(&Utc))
            }
            TimestampFormat::Rfc3339 => {
                if value.as_bytes().get(19) == Some(&b'.') {
                    return None;
                }
                DateTime::parse_from_rfc3339(value).ok().map(|t| t.with_timezone(&Utc))
            }
            TimestampFormat::Pattern(p) => NaiveDateTime::parse_from_str(value, p).ok().map(|t| t.and_utc()),
            TimestampFormat::EpochSeconds => epoch_digits(value, 1..=11).and_then(|n| DateTime::from_timestamp(n, 0)),
            TimestampFormat::EpochMillis => epoch_digits(value, 12..=14).and_then(DateTime::from_timestamp_millis),
        }
    }
}

fn epoch_digits(value: &str, digits: std::ops::RangeInclusive<usize>) -> Option<i64> {
    let unsigned = value.strip_prefix('-').unwrap_or(value);
    if !digits.contains(&unsigned.len()) || !unsigned.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    value.parse().ok()
}

impl fmt::Display for TimestampFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimestampFormat::Rfc3339Fraction => f.write_str("rfc3339_fraction"),
            TimestampFormat::Rfc3339 => f.write_str("rfc3339"),
            TimestampFormat::Pattern(p) => f.write_str(p),
            TimestampFormat::EpochSeconds => f.write_str("epoch_seconds"),
            TimestampFormat::EpochMillis => f.write_str("epoch_millis"),
        }
    }
}

impl FromStr for TimestampFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "rfc3339_fraction" => TimestampFormat::Rfc3339Fraction,
            "rfc3339" => TimestampFormat::Rfc3339,
            "epoch_seconds" => TimestampFormat::EpochSeconds,
            "epoch_millis" => TimestampFormat::EpochMillis,
            p if p.contains('%') => {
                let probe = chrono::format::StrftimeItems::new(p);
                if probe.clone().any(|item| matches!(item, chrono::format::Item::Error)) {
                    return Err(format!("invalid timestamp pattern `{p}`"));
                }
                TimestampFormat::Pattern(p.to_owned())
            }
            other => {
                return Err(format!(
                    "unknown timestamp format `{other}` (expected rfc3339_fraction, rfc3339, epoch_seconds, epoch_millis or a %-pattern)"
                ))
            }
        })
    }
}

impl Serialize for TimestampFormat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TimestampFormat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Ordered format list plus the failure policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimestampParser {
    pub formats: Vec<TimestampFormat>,
    pub strict: bool,
}

impl Default for TimestampParser {
    fn default() -> Self {
        TimestampParser {
            formats: TimestampFormat::defaults(),
            strict: false,
        }
    }
}

impl TimestampParser {
    /// First format that accepts `value` wins.
    pub fn parse(&self, value: &str) -> Option<DateTime<Utc>> {
        self.formats.iter().find_map(|f| f.parse(value))
    }

    /// Whether a text value matches one of the non-epoch formats.
    pub fn recognizes_text(&self, value: &str) -> bool {
        self.formats
            .iter()
            .filter(|f| !f.is_epoch())
            .any(|f| f.parse(value).is_some())
    }
}

/// Parses with the default formats; failures log a warning and yield `None`.
pub fn parse_timestamp(value: &str) -> Option<DateTime<Utc>> {
    let parsed = TimestampParser::default().parse(value);
    if parsed.is_none() {
        log::warn!("unparseable timestamp `{value}`");
    }
    parsed
}

/// Whether `value` is a textual timestamp in one of the default formats.
pub fn looks_like_timestamp(value: &str) -> bool {
    let b = value.as_bytes();
    if b.len() < 19 || b[4] != b'-' || b[7] != b'-' || !b[..4].iter().all(u8::is_ascii_digit) {
        return false;
    }
    TimestampParser::default().recognizes_text(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimeWindows {
    pub year: i32,
    pub month: u32,
    /// 1 = Monday … 7 = Sunday.
    pub day_of_week: u32,
    pub hour: u32,
    pub minute: u32,
}

pub fn decompose_time(instant: &DateTime<Utc>) -> TimeWindows {
    TimeWindows {
        year: instant.year(),
        month: instant.month(),
        day_of_week: instant.weekday().number_from_monday(),
        hour: instant.hour(),
        minute: instant.minute(),
    }
}

/// One converted time column and the columns that replaced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeConversion {
    pub column: String,
    pub into: Vec<String>,
    /// Non-null input cells that failed to parse (lenient mode).
    pub failures: usize,
}

const WINDOW_SUFFIXES: [&str; 5] = ["year", "month", "day_of_week", "hour", "minute"];

/// Replaces time columns by a `<name>_ts` timestamp column followed by
/// `<name>_year`, `_month`, `_day_of_week`, `_hour` and `_minute`.
///
/// Text columns whose non-null values all match a textual format are
/// detected automatically; `explicit` names are converted whatever their
/// kind, which is how epoch formats get applied.
pub fn convert_time_columns(
    frame: &Frame,
    parser: &TimestampParser,
    explicit: &[String],
) -> Result<(Frame, Vec<TimeConversion>), FrameError> {
    let targets: Vec<String> = frame
        .columns()
        .iter()
        .filter(|c| explicit.contains(&c.name) || is_time_column(&c.data, parser))
        .map(|c| c.name.clone())
        .collect();
    let mut out = frame.clone();
    let mut conversions = Vec::new();
    for name in targets {
        let column = out.require(&name)?.clone();
        let mut failures = 0;
        let mut instants = Vec::with_capacity(column.data.len());
        for row in 0..column.data.len() {
            let instant = match &column.data {
                ColumnData::Timestamp(v) => v[row],
                data => match data.key(row) {
                    None => None,
                    Some(text) => match parser.parse(&text) {
                        Some(t) => Some(t),
                        None if parser.strict => {
                            return Err(FrameError::Timestamp {
                                column: name.clone(),
                                row,
                                value: text,
                            })
                        }
                        None => {
                            log::warn!("column `{name}` row {row}: unparseable timestamp `{text}`");
                            failures += 1;
                            None
                        }
                    },
                },
            };
            instants.push(instant);
        }
        let taken = |n: &str| n != name && out.column(n).is_some();
        let ts_name = unique_name(&format!("{name}_ts"), taken);
        let mut replacement = vec![Column {
            name: ts_name.clone(),
            source: column.source.clone(),
            data: ColumnData::Timestamp(instants.clone()),
        }];
        let windows: Vec<Option<TimeWindows>> = instants.iter().map(|t| t.as_ref().map(decompose_time)).collect();
        for suffix in WINDOW_SUFFIXES {
            let col_name = unique_name(&format!("{name}_{suffix}"), |n| {
                taken(n) || replacement.iter().any(|c| c.name == n)
            });
            let values = windows
                .iter()
                .map(|w| {
                    w.map(|w| match suffix {
                        "year" => i64::from(w.year),
                        "month" => i64::from(w.month),
                        "day_of_week" => i64::from(w.day_of_week),
                        "hour" => i64::from(w.hour),
                        _ => i64::from(w.minute),
                    })
                })
                .collect();
            replacement.push(Column {
                name: col_name,
                source: column.source.clone(),
                data: ColumnData::Int(values),
            });
        }
        conversions.push(TimeConversion {
            column: name.clone(),
            into: replacement.iter().map(|c| c.name.clone()).collect(),
            failures,
        });
        out = out.replace_column(&name, replacement)?;
    }
    Ok((out, conversions))
}

fn is_time_column(data: &ColumnData, parser: &TimestampParser) -> bool {
    match data {
        ColumnData::Timestamp(_) => true,
        ColumnData::Text(values) => {
            let mut any = false;
            for value in values.iter().flatten() {
                if !parser.recognizes_text(value) {
                    return false;
                }
                any = true;
            }
            any
        }
        _ => false,
    }
}
