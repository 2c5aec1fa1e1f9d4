use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::path::FieldPath;
use super::SchemaError;
use crate::frame::time::looks_like_timestamp;
use crate::value::ValueNode;

/// Delimiters tried for delimited-string detection, in priority order.
pub const CANDIDATE_DELIMITERS: [char; 4] = [':', ',', ';', '|'];

/// Fraction of non-null samples (in tenths) that must share the delimiter count.
pub const DELIMITER_AGREEMENT_TENTHS: usize = 9;

/// How a path's values are flattened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum FieldClass {
    Scalar,
    /// Object with one constant inner key set; its leaves are promoted.
    StructWrapper,
    /// Object whose inner key set varies across records.
    DictUnion,
    /// Text carrying a fixed number of `delimiter`-separated parts.
    DelimitedString {
        delimiter: char,
    },
    List,
}

impl FieldClass {
    pub fn is_complex(self) -> bool {
        !matches!(self, FieldClass::Scalar)
    }
}

/// User overrides applied before the inference rules.
#[derive(Debug, Clone, Default)]
pub struct ClassOverrides {
    /// Rendered patterns forced to [`FieldClass::DictUnion`] when object-valued.
    pub dict_paths: BTreeSet<String>,
    /// Rendered patterns forced to split on the given delimiter when text.
    pub delimiters: BTreeMap<String, char>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fundamental {
    Object,
    Array,
    Scalar,
}

/// Classifies the values observed at one path.
pub fn classify_field(path: &FieldPath, samples: &[&ValueNode]) -> Result<FieldClass, SchemaError> {
    classify_with(path, samples, &ClassOverrides::default())
}

pub fn classify_with(
    path: &FieldPath,
    samples: &[&ValueNode],
    overrides: &ClassOverrides,
) -> Result<FieldClass, SchemaError> {
    let non_null: Vec<&ValueNode> = samples.iter().copied().filter(|v| !v.is_null()).collect();
    let mut seen: Option<Fundamental> = None;
    for value in &non_null {
        let f = match value {
            ValueNode::Object(_) => Fundamental::Object,
            ValueNode::Array(_) => Fundamental::Array,
            _ => Fundamental::Scalar,
        };
        match seen {
            None => seen = Some(f),
            Some(prev) if prev != f => {
                return Err(SchemaError::ClassConflict {
                    path: path.to_string(),
                    first: fundamental_name(prev),
                    second: fundamental_name(f),
                })
            }
            Some(_) => {}
        }
    }
    let rendered = path.pattern().to_string();
    match seen {
        None => Ok(FieldClass::Scalar),
        Some(Fundamental::Array) => Ok(FieldClass::List),
        Some(Fundamental::Object) => {
            if overrides.dict_paths.contains(&rendered) {
                return Ok(FieldClass::DictUnion);
            }
            let key_sets: BTreeSet<BTreeSet<&str>> = non_null
                .iter()
                .filter_map(|v| v.as_object())
                .map(|m| m.keys().map(String::as_str).collect())
                .collect();
            if key_sets.len() >= 2 {
                Ok(FieldClass::DictUnion)
            } else {
                Ok(FieldClass::StructWrapper)
            }
        }
        Some(Fundamental::Scalar) => {
            if let Some(&delimiter) = overrides.delimiters.get(&rendered) {
                return Ok(FieldClass::DelimitedString { delimiter });
            }
            Ok(detect_delimiter(&non_null, &CANDIDATE_DELIMITERS)
                .map(|delimiter| FieldClass::DelimitedString { delimiter })
                .unwrap_or(FieldClass::Scalar))
        }
    }
}

/// First candidate delimiter whose most common per-value count is at least
/// one and shared by at least 90% of the non-null samples.
///
/// Timestamps and URLs never count as delimited even though they contain ':'.
pub(crate) fn detect_delimiter(non_null: &[&ValueNode], candidates: &[char]) -> Option<char> {
    if non_null.is_empty() {
        return None;
    }
    let texts: Vec<&str> = non_null
        .iter()
        .filter_map(|v| match v {
            ValueNode::Text(s) if !is_opaque_text(s) => Some(s.as_str()),
            _ => None,
        })
        .collect();
    if texts.is_empty() {
        return None;
    }
    let total = non_null.len();
    for &delimiter in candidates {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for text in &texts {
            *counts.entry(text.matches(delimiter).count()).or_default() += 1;
        }
        // Highest frequency wins; ties go to the smaller count.
        let (count, freq) = counts.iter().fold(
            (0usize, 0usize),
            |best, (&c, &f)| if f > best.1 { (c, f) } else { best },
        );
        if count >= 1 && freq * 10 >= DELIMITER_AGREEMENT_TENTHS * total {
            return Some(delimiter);
        }
    }
    None
}

fn is_opaque_text(s: &str) -> bool {
    s.contains("://") || looks_like_timestamp(s)
}

fn fundamental_name(f: Fundamental) -> &'static str {
    match f {
        Fundamental::Object => "object",
        Fundamental::Array => "array",
        Fundamental::Scalar => "scalar",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_record;

    fn values(json: &[&str]) -> Vec<ValueNode> {
        json.iter()
            .map(|s| {
                let rec = parse_record(&format!("{{\"v\":{s}}}"), 1).unwrap();
                rec.as_object().unwrap()["v"].clone()
            })
            .collect()
    }

    fn classify(json: &[&str]) -> Result<FieldClass, SchemaError> {
        let vals = values(json);
        let refs: Vec<&ValueNode> = vals.iter().collect();
        classify_field(&FieldPath::key("v"), &refs)
    }

    #[test]
    fn oid_wrapper_is_struct() {
        let class = classify(&[
            r#"{"$oid":"5776664eb3c585471bf1bb5"}"#,
            r#"{"$oid":"57b309abb3c585471bf4d920"}"#,
        ]);
        assert_eq!(class.unwrap(), FieldClass::StructWrapper);
    }

    #[test]
    fn varying_key_sets_are_dict_union() {
        let class = classify(&[r#"{"a":1,"b":2}"#, r#"{"c":"x"}"#, r#"{"a":3,"b":4}"#]);
        assert_eq!(class.unwrap(), FieldClass::DictUnion);
    }

    #[test]
    fn colon_separated_signature_is_delimited() {
        let class = classify(&[r#""4:64+0:0:1024,0:df:0""#, r#""4:128+0:0:1460,7:df:1""#]);
        assert_eq!(class.unwrap(), FieldClass::DelimitedString { delimiter: ':' });
    }

    #[test]
    fn varying_delimiter_counts_are_scalar() {
        let class = classify(&[r#""a:b""#, r#""a:b:c""#, r#""a""#]);
        assert_eq!(class.unwrap(), FieldClass::Scalar);
    }

    #[test]
    fn ninety_percent_agreement_is_enough() {
        let mut items = vec![r#""a,b""#; 9];
        items.push(r#""ab""#);
        assert_eq!(
            classify(&items).unwrap(),
            FieldClass::DelimitedString { delimiter: ',' }
        );
        let mut items = vec![r#""a,b""#; 8];
        items.extend([r#""ab""#, r#""c""#]);
        assert_eq!(classify(&items).unwrap(), FieldClass::Scalar);
    }

    #[test]
    fn timestamps_and_urls_are_not_split() {
        let ts = classify(&[
            r#""2016-07-01T14:48:37.839108389+02:00""#,
            r#""2016-08-16T14:43:23+02:00""#,
        ]);
        assert_eq!(ts.unwrap(), FieldClass::Scalar);
        let url = classify(&[r#""http://a.example/x""#, r#""https://b.example/""#]);
        assert_eq!(url.unwrap(), FieldClass::Scalar);
    }

    #[test]
    fn arrays_are_lists_and_nulls_are_ignored() {
        assert_eq!(classify(&["[1,2]", "null", "[]"]).unwrap(), FieldClass::List);
        assert_eq!(classify(&["null"]).unwrap(), FieldClass::Scalar);
    }

    #[test]
    fn mixed_scalar_kinds_widen_instead_of_failing() {
        assert_eq!(classify(&["19", r#""19""#]).unwrap(), FieldClass::Scalar);
    }

    #[test]
    fn object_and_text_conflict_names_path() {
        let err = classify(&[r#"{"a":1}"#, r#""x""#]).unwrap_err();
        assert!(err.to_string().contains('v'), "{err}");
        assert!(matches!(err, SchemaError::ClassConflict { .. }));
    }

    #[test]
    fn overrides_take_priority() {
        let vals = values(&[r#"{"a":1}"#, r#"{"a":2}"#]);
        let refs: Vec<&ValueNode> = vals.iter().collect();
        let mut overrides = ClassOverrides::default();
        overrides.dict_paths.insert("v".into());
        assert_eq!(
            classify_with(&FieldPath::key("v"), &refs, &overrides).unwrap(),
            FieldClass::DictUnion
        );
        let vals = values(&[r#""a b""#]);
        let refs: Vec<&ValueNode> = vals.iter().collect();
        overrides.delimiters.insert("v".into(), ' ');
        assert_eq!(
            classify_with(&FieldPath::key("v"), &refs, &overrides).unwrap(),
            FieldClass::DelimitedString { delimiter: ' ' }
        );
    }
}
