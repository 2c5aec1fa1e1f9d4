use std::collections::BTreeSet;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::path::{render_key, render_segment, Container, FieldPath, Segment};
use crate::value::ValueNode;

/// Canonical structural signature of a record (or of part of one).
///
/// Entries are `(rendered path, kind)` pairs sorted by path then kind; array
/// slots are wildcarded so list length does not affect the signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SchemaFingerprint {
    pub entries: Vec<FingerprintEntry>,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FingerprintEntry {
    pub path: String,
    pub kind: &'static str,
}

impl SchemaFingerprint {
    pub fn from_entries(entries: impl IntoIterator<Item = FingerprintEntry>) -> Self {
        Self::from_sorted(entries.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
    }

    fn from_sorted(entries: Vec<FingerprintEntry>) -> Self {
        const HEX: &[u8; 16] = b"0123456789abcdef";
        let mut hasher = Sha256::new();
        for entry in &entries {
            hasher.update(entry.path.as_bytes());
            hasher.update(b"\t");
            hasher.update(entry.kind.as_bytes());
            hasher.update(b"\n");
        }
        let mut digest = String::with_capacity(64);
        for byte in hasher.finalize().iter() {
            digest.push(HEX[usize::from(byte >> 4)] as char);
            digest.push(HEX[usize::from(byte & 0xf)] as char);
        }
        SchemaFingerprint { entries, digest }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Structural fingerprint of a whole record.
pub fn fingerprint(record: &ValueNode) -> SchemaFingerprint {
    let mut entries = BTreeSet::new();
    collect(record, &mut String::new(), 0, &mut entries);
    SchemaFingerprint::from_sorted(entries.into_iter().collect())
}

/// Fingerprint restricted to the subtrees rooted at `roots` (patterns without
/// array slots). Absent or null roots contribute nothing.
pub fn fingerprint_subtrees(record: &ValueNode, roots: &[FieldPath]) -> SchemaFingerprint {
    let mut entries = BTreeSet::new();
    for root in roots {
        let Some(node) = lookup(record, root) else {
            continue;
        };
        let mut rendered = root.to_string();
        collect(node, &mut rendered, root.len(), &mut entries);
    }
    SchemaFingerprint::from_sorted(entries.into_iter().collect())
}

/// Follows a key-only path from the record root.
pub(crate) fn lookup<'a>(record: &'a ValueNode, path: &FieldPath) -> Option<&'a ValueNode> {
    let mut node = record;
    for segment in path.segments() {
        match (segment, node) {
            (Segment::Key(k), ValueNode::Object(map)) => node = map.get(k)?,
            (Segment::Index(i), ValueNode::Array(items)) => node = items.get(*i)?,
            _ => return None,
        }
    }
    Some(node)
}

/// `path` holds the rendering of the `depth` segments above `node`.
fn collect(node: &ValueNode, path: &mut String, depth: usize, out: &mut BTreeSet<FingerprintEntry>) {
    let mark = path.len();
    match node {
        ValueNode::Object(map) => {
            if map.is_empty() {
                if depth > 0 {
                    render_segment(path, depth, &Segment::Empty(Container::Object));
                    insert(path, "empty_object", out);
                }
            } else {
                for (key, value) in map {
                    render_key(path, depth, key);
                    collect(value, path, depth + 1, out);
                    path.truncate(mark);
                }
            }
        }
        ValueNode::Array(items) => {
            if items.is_empty() {
                render_segment(path, depth, &Segment::Empty(Container::Array));
                insert(path, "empty_array", out);
            } else {
                render_segment(path, depth, &Segment::AnyIndex);
                for item in items {
                    collect(item, path, depth + 1, out);
                }
            }
        }
        scalar => {
            let kind = scalar.as_scalar().map(|s| s.kind().name()).unwrap_or("null");
            insert(path, kind, out);
        }
    }
    path.truncate(mark);
}

fn insert(path: &str, kind: &'static str, out: &mut BTreeSet<FingerprintEntry>) {
    out.insert(FingerprintEntry {
        path: path.to_owned(),
        kind,
    });
}
