use std::fmt;

use indexmap::IndexMap;
use serde_json::{Map, Number, Value};

/// Largest magnitude (exclusive) an integral JSON number may have and still be
/// kept as [`ValueNode::Int`].
pub(crate) const EXACT_INT_LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53

/// Parsed JSON value tree for one event record.
///
/// Object fields keep their source order. Equality on objects ignores field
/// order; use [`ValueNode::eq_ordered`] when order matters.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueNode {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Object(IndexMap<String, ValueNode>),
    Array(Vec<ValueNode>),
}

impl ValueNode {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ValueNode::Null => "null",
            ValueNode::Bool(_) => "bool",
            ValueNode::Int(_) => "int",
            ValueNode::Float(_) => "float",
            ValueNode::Text(_) => "text",
            ValueNode::Object(_) => "object",
            ValueNode::Array(_) => "array",
        }
    }

    pub fn as_object(&self) -> Option<&IndexMap<String, ValueNode>> {
        match self {
            ValueNode::Object(map) => Some(map),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, ValueNode::Null)
    }

    /// Scalar view of a leaf; `None` for objects and arrays.
    pub fn as_scalar(&self) -> Option<Scalar> {
        Some(match self {
            ValueNode::Null => Scalar::Null,
            ValueNode::Bool(b) => Scalar::Bool(*b),
            ValueNode::Int(i) => Scalar::Int(*i),
            ValueNode::Float(f) => Scalar::Float(*f),
            ValueNode::Text(s) => Scalar::Text(s.clone()),
            ValueNode::Object(_) | ValueNode::Array(_) => return None,
        })
    }

    /// Nesting depth counted in containers; scalars are depth 0.
    pub fn depth(&self) -> usize {
        match self {
            ValueNode::Object(map) => 1 + map.values().map(ValueNode::depth).max().unwrap_or(0),
            ValueNode::Array(items) => 1 + items.iter().map(ValueNode::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// Structural equality that also requires identical object field order.
    pub fn eq_ordered(&self, other: &ValueNode) -> bool {
        match (self, other) {
            (ValueNode::Object(a), ValueNode::Object(b)) => {
                a.len() == b.len()
                    && a.iter()
                        .zip(b.iter())
                        .all(|((ka, va), (kb, vb))| ka == kb && va.eq_ordered(vb))
            }
            (ValueNode::Array(a), ValueNode::Array(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.eq_ordered(y))
            }
            _ => self == other,
        }
    }

    /// Converts a `serde_json` value, applying the integer rule: numbers with
    /// no fractional part and magnitude below 2^53 become `Int`.
    pub fn from_json(value: Value) -> ValueNode {
        match value {
            Value::Null => ValueNode::Null,
            Value::Bool(b) => ValueNode::Bool(b),
            Value::Number(n) => number_node(&n),
            Value::String(s) => ValueNode::Text(s),
            Value::Array(items) => ValueNode::Array(items.into_iter().map(ValueNode::from_json).collect()),
            Value::Object(map) => {
                ValueNode::Object(map.into_iter().map(|(k, v)| (k, ValueNode::from_json(v))).collect())
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ValueNode::Null => Value::Null,
            ValueNode::Bool(b) => Value::Bool(*b),
            ValueNode::Int(i) => Value::Number(Number::from(*i)),
            ValueNode::Float(f) => Number::from_f64(*f).map(Value::Number).unwrap_or(Value::Null),
            ValueNode::Text(s) => Value::String(s.clone()),
            ValueNode::Array(items) => Value::Array(items.iter().map(ValueNode::to_json).collect()),
            ValueNode::Object(map) => {
                let mut out = Map::with_capacity(map.len());
                for (k, v) in map {
                    out.insert(k.clone(), v.to_json());
                }
                Value::Object(out)
            }
        }
    }

    pub fn to_json_string(&self) -> String {
        self.to_json().to_string()
    }
}

impl fmt::Display for ValueNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json_string())
    }
}

fn number_node(n: &Number) -> ValueNode {
    if let Some(i) = n.as_i64() {
        if (i.unsigned_abs() as f64) < EXACT_INT_LIMIT {
            return ValueNode::Int(i);
        }
        return ValueNode::Float(i as f64);
    }
    if let Some(u) = n.as_u64() {
        return ValueNode::Float(u as f64);
    }
    let f = n.as_f64().unwrap_or(f64::NAN);
    if f.fract() == 0.0 && f.abs() < EXACT_INT_LIMIT {
        ValueNode::Int(f as i64)
    } else {
        ValueNode::Float(f)
    }
}

/// Kind of a scalar cell. The lattice is `Null < Int < Float < Text`; `Bool`
/// only joins with itself and `Null`, anything else widens to `Text`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Null,
    Bool,
    Int,
    Float,
    Text,
}

impl ScalarKind {
    pub fn join(self, other: ScalarKind) -> ScalarKind {
        use ScalarKind::*;
        match (self, other) {
            (a, b) if a == b => a,
            (Null, x) | (x, Null) => x,
            (Int, Float) | (Float, Int) => Float,
            _ => Text,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarKind::Null => "null",
            ScalarKind::Bool => "bool",
            ScalarKind::Int => "int",
            ScalarKind::Float => "float",
            ScalarKind::Text => "text",
        }
    }
}

/// A single flat cell value.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    pub fn kind(&self) -> ScalarKind {
        match self {
            Scalar::Null => ScalarKind::Null,
            Scalar::Bool(_) => ScalarKind::Bool,
            Scalar::Int(_) => ScalarKind::Int,
            Scalar::Float(_) => ScalarKind::Float,
            Scalar::Text(_) => ScalarKind::Text,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Scalar::Null)
    }

    /// Text rendering used when a column widens to text. `None` for null.
    pub fn render(&self) -> Option<String> {
        match self {
            Scalar::Null => None,
            Scalar::Bool(b) => Some(b.to_string()),
            Scalar::Int(i) => Some(i.to_string()),
            Scalar::Float(f) => Some(format_float(*f)),
            Scalar::Text(s) => Some(s.clone()),
        }
    }

    pub fn into_node(self) -> ValueNode {
        match self {
            Scalar::Null => ValueNode::Null,
            Scalar::Bool(b) => ValueNode::Bool(b),
            Scalar::Int(i) => ValueNode::Int(i),
            Scalar::Float(f) => ValueNode::Float(f),
            Scalar::Text(s) => ValueNode::Text(s),
        }
    }

    pub fn from_json(value: &Value) -> Option<Scalar> {
        ValueNode::from_json(value.clone()).as_scalar()
    }

    pub fn to_json(&self) -> Value {
        self.clone().into_node().to_json()
    }
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn format_float(f: f64) -> String {
    if f.is_finite() {
        // `Display` prints the shortest digits that round-trip.
        let text = format!("{f}");
        if text == "-0" {
            "-0.0".into()
        } else {
            text
        }
    } else if f.is_nan() {
        "NaN".into()
    } else if f > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ValueNode {
        ValueNode::from_json(serde_json::from_str(s).unwrap())
    }

    #[test]
    fn integral_numbers_below_two_pow_53_are_ints() {
        assert_eq!(parse("19"), ValueNode::Int(19));
        assert_eq!(parse("-4"), ValueNode::Int(-4));
        assert_eq!(parse("1e3"), ValueNode::Int(1000));
        assert_eq!(parse("2.0"), ValueNode::Int(2));
        assert_eq!(parse("9007199254740991"), ValueNode::Int(9_007_199_254_740_991));
    }

    #[test]
    fn large_or_fractional_numbers_are_floats() {
        assert_eq!(parse("2.5"), ValueNode::Float(2.5));
        assert_eq!(parse("9007199254740992"), ValueNode::Float(EXACT_INT_LIMIT));
        assert_eq!(parse("18446744073709551615"), ValueNode::Float(18446744073709551615.0));
    }

    #[test]
    fn kind_join_follows_lattice() {
        use ScalarKind::*;
        assert_eq!(Null.join(Int), Int);
        assert_eq!(Int.join(Float), Float);
        assert_eq!(Float.join(Text), Text);
        assert_eq!(Bool.join(Null), Bool);
        assert_eq!(Bool.join(Int), Text);
    }

    #[test]
    fn ordered_equality_sees_field_order() {
        let a = parse(r#"{"a":1,"b":2}"#);
        let b = parse(r#"{"b":2,"a":1}"#);
        assert_eq!(a, b);
        assert!(!a.eq_ordered(&b));
        assert!(a.eq_ordered(&a.clone()));
    }

    #[test]
    fn float_rendering_round_trips() {
        for f in [0.1, 1.0 / 3.0, 1e300, -2.5e-10, 123456.0] {
            assert_eq!(format_float(f).parse::<f64>().unwrap(), f);
        }
    }
}
