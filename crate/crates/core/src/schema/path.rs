use std::borrow::Borrow;
use std::fmt;

/// Which kind of container an empty-container marker stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Container {
    Object,
    Array,
}

/// One step of a [`FieldPath`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    /// Object key, raw source name.
    Key(String),
    /// Concrete array slot.
    Index(usize),
    /// Any array slot; used by schema patterns so list length does not
    /// change a record's structure.
    AnyIndex,
    /// Position within a delimiter-split text value.
    Part { index: usize, delimiter: char },
    /// Terminal marker for an empty object or array.
    Empty(Container),
}

impl Segment {
    fn as_pattern(&self) -> Segment {
        match self {
            Segment::Index(_) => Segment::AnyIndex,
            other => other.clone(),
        }
    }
}

/// Ordered list of segments from the record root to a value.
///
/// Patterns (see [`FieldPath::pattern`]) replace concrete array indices with
/// [`Segment::AnyIndex`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldPath(Vec<Segment>);

impl FieldPath {
    pub fn root() -> Self {
        FieldPath(Vec::new())
    }

    pub fn key(name: &str) -> Self {
        FieldPath(vec![Segment::Key(name.to_owned())])
    }

    pub fn from_segments(segments: Vec<Segment>) -> Self {
        FieldPath(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, segment: Segment) -> FieldPath {
        let mut segments = self.0.clone();
        segments.push(segment);
        FieldPath(segments)
    }

    pub fn pattern(&self) -> FieldPath {
        FieldPath(self.0.iter().map(Segment::as_pattern).collect())
    }

    pub fn starts_with(&self, prefix: &FieldPath) -> bool {
        self.0.starts_with(&prefix.0)
    }

    pub fn has_any_index(&self) -> bool {
        self.0
            .iter()
            .any(|s| matches!(s, Segment::AnyIndex | Segment::Index(_)))
    }

    /// Prefix of the path up to (excluding) the first array slot, split part
    /// or empty marker. Two columns with the same attribute come from the
    /// same named source field.
    pub fn attribute(&self) -> FieldPath {
        FieldPath(
            self.0
                .iter()
                .take_while(|s| matches!(s, Segment::Key(_)))
                .cloned()
                .collect(),
        )
    }

    /// Column name before collision handling: segments joined with `_`,
    /// `$` and `@` removed from keys, positions appended as numbers.
    pub fn column_base_name(&self) -> String {
        column_base_name(&self.0)
    }

    /// Parses the text rendering produced by `Display`. `\e` stands for
    /// nothing, so an empty leading key renders as `\e`.
    pub fn parse(text: &str) -> Option<FieldPath> {
        let mut segments = Vec::new();
        let mut chars = text.chars().peekable();
        let mut expect_key = true;
        while let Some(&c) = chars.peek() {
            match c {
                '.' if !expect_key => {
                    chars.next();
                    segments.push(Segment::Key(read_key(&mut chars)));
                }
                '[' => {
                    chars.next();
                    let digits: String = std::iter::from_fn(|| chars.next_if(|c| c.is_ascii_digit())).collect();
                    if chars.next()? != ']' {
                        return None;
                    }
                    if digits.is_empty() {
                        segments.push(Segment::AnyIndex);
                    } else {
                        segments.push(Segment::Index(digits.parse().ok()?));
                    }
                }
                '{' => {
                    chars.next();
                    let delimiter = chars.next()?;
                    let digits: String = std::iter::from_fn(|| chars.next_if(|c| c.is_ascii_digit())).collect();
                    if chars.next()? != '}' {
                        return None;
                    }
                    segments.push(Segment::Part {
                        index: digits.parse().ok()?,
                        delimiter,
                    });
                }
                '<' => {
                    let marker: String = chars.by_ref().take(4).collect();
                    match marker.as_str() {
                        "<{}>" => segments.push(Segment::Empty(Container::Object)),
                        "<[]>" => segments.push(Segment::Empty(Container::Array)),
                        _ => return None,
                    }
                }
                _ if expect_key => segments.push(Segment::Key(read_key(&mut chars))),
                _ => return None,
            }
            expect_key = false;
        }
        Some(FieldPath(segments))
    }
}

fn read_key(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> String {
    let mut key = String::new();
    while let Some(&c) = chars.peek() {
        match c {
            '\\' => {
                chars.next();
                match chars.next() {
                    Some('e') | None => {}
                    Some(escaped) => key.push(escaped),
                }
            }
            '.' | '[' | '{' | '<' => break,
            _ => {
                key.push(c);
                chars.next();
            }
        }
    }
    key
}

pub(crate) fn column_base_name(segments: &[Segment]) -> String {
    let mut name = String::new();
    for segment in segments {
        let piece = match segment {
            Segment::Key(k) => k.chars().filter(|c| *c != '$' && *c != '@').collect::<String>(),
            Segment::Index(i) | Segment::Part { index: i, .. } => i.to_string(),
            Segment::AnyIndex => "n".to_owned(),
            Segment::Empty(_) => continue,
        };
        if piece.is_empty() {
            continue;
        }
        if !name.is_empty() {
            name.push('_');
        }
        name.push_str(&piece);
    }
    if name.is_empty() {
        name.push_str("col");
    }
    name
}

impl Borrow<[Segment]> for FieldPath {
    fn borrow(&self) -> &[Segment] {
        &self.0
    }
}

/// Appends a key segment at position `index`, escaping separators.
pub(crate) fn render_key(out: &mut String, index: usize, key: &str) {
    if index > 0 {
        out.push('.');
    } else if key.is_empty() {
        out.push_str("\\e");
    }
    for c in key.chars() {
        if matches!(c, '.' | '[' | '{' | '<' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
}

/// Appends the text rendering of `segment` at position `index`.
pub(crate) fn render_segment(out: &mut String, index: usize, segment: &Segment) {
    use fmt::Write as _;
    match segment {
        Segment::Key(k) => render_key(out, index, k),
        Segment::Index(idx) => {
            let _ = write!(out, "[{idx}]");
        }
        Segment::AnyIndex => out.push_str("[]"),
        Segment::Part { index, delimiter } => {
            let _ = write!(out, "{{{delimiter}{index}}}");
        }
        Segment::Empty(Container::Object) => out.push_str("<{}>"),
        Segment::Empty(Container::Array) => out.push_str("<[]>"),
    }
}

impl fmt::Display for FieldPath {
    /// `payload.raw_sig{:3}{,0}`, `commands[0]`, `commands[]`, `tags<[]>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, segment) in self.0.iter().enumerate() {
            render_segment(&mut out, i, segment);
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(segments: Vec<Segment>) -> FieldPath {
        FieldPath::from_segments(segments)
    }

    #[test]
    fn struct_leaf_naming_strips_dollar() {
        let p = path(vec![Segment::Key("_id".into()), Segment::Key("$oid".into())]);
        assert_eq!(p.column_base_name(), "_id_oid");
        assert_eq!(p.to_string(), "_id.$oid");
    }

    #[test]
    fn positions_are_appended() {
        let p = path(vec![
            Segment::Key("raw_sig".into()),
            Segment::Part {
                index: 3,
                delimiter: ':',
            },
            Segment::Part {
                index: 1,
                delimiter: ',',
            },
        ]);
        assert_eq!(p.column_base_name(), "raw_sig_3_1");
        assert_eq!(p.to_string(), "raw_sig{:3}{,1}");
        let list = path(vec![Segment::Key("@tags".into()), Segment::Index(2)]);
        assert_eq!(list.column_base_name(), "tags_2");
    }

    #[test]
    fn rendering_parses_back() {
        let p = path(vec![
            Segment::Key("a.b".into()),
            Segment::Index(0),
            Segment::Key("x[y".into()),
            Segment::AnyIndex,
            Segment::Part {
                index: 2,
                delimiter: ';',
            },
            Segment::Empty(Container::Array),
        ]);
        assert_eq!(FieldPath::parse(&p.to_string()), Some(p));
    }

    #[test]
    fn empty_leading_key_is_not_the_root() {
        for p in [
            path(vec![Segment::Key(String::new())]),
            path(vec![Segment::Key(String::new()), Segment::Index(0)]),
            path(vec![Segment::Key(String::new()), Segment::Key(String::new())]),
        ] {
            assert_eq!(FieldPath::parse(&p.to_string()), Some(p));
        }
        assert_eq!(FieldPath::parse(""), Some(FieldPath::root()));
    }

    #[test]
    fn attribute_stops_at_first_position() {
        let p = path(vec![
            Segment::Key("payload".into()),
            Segment::Key("commands".into()),
            Segment::Index(1),
        ]);
        assert_eq!(p.attribute().to_string(), "payload.commands");
        assert_eq!(p.pattern().to_string(), "payload.commands[]");
    }
}
