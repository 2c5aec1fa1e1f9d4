use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::frame::{Column, ColumnData, Frame};

pub const NAME_SIMILARITY_THRESHOLD: f64 = 0.5;
pub const VALUE_JACCARD_THRESHOLD: f64 = 0.5;

const DEFAULT_TABLE: &str = include_str!("../../data/abbreviations.txt");

/// Token expansions applied before comparing column names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbbreviationTable {
    entries: BTreeMap<String, String>,
}

impl Default for AbbreviationTable {
    fn default() -> Self {
        AbbreviationTable::parse(DEFAULT_TABLE).expect("bundled abbreviation table is well-formed")
    }
}

impl AbbreviationTable {
    pub fn empty() -> Self {
        AbbreviationTable {
            entries: BTreeMap::new(),
        }
    }

    /// Parses `short=long` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut table = AbbreviationTable::empty();
        table.extend_from(text)?;
        Ok(table)
    }

    /// Adds entries from another `short=long` text; later entries win.
    pub fn extend_from(&mut self, text: &str) -> Result<(), String> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (short, long) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected short=long, got `{line}`", i + 1))?;
            let (short, long) = (short.trim().to_lowercase(), long.trim().to_lowercase());
            if short.is_empty() || long.is_empty() || short.contains(char::is_whitespace) {
                return Err(format!("line {}: empty or malformed entry `{line}`", i + 1));
            }
            self.entries.insert(short, long);
        }
        Ok(())
    }

    pub fn expand<'a>(&'a self, token: &'a str) -> &'a str {
        self.entries.get(token).map_or(token, String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Lowercase name tokens: split on non-alphanumerics and camelCase
/// boundaries (`connectionProtocol`, `HTTPServer`, `src_ip`).
pub fn tokenize(name: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in name.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
        let chars: Vec<char> = word.chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let boundary = i > 0 && c.is_uppercase() && {
                let prev = chars[i - 1];
                prev.is_lowercase()
                    || prev.is_ascii_digit()
                    || (prev.is_uppercase() && chars.get(i + 1).is_some_and(|n| n.is_lowercase()))
            };
            if boundary && !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            current.extend(c.to_lowercase());
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

fn expanded_tokens(name: &str, table: &AbbreviationTable) -> Vec<String> {
    tokenize(name).iter().map(|t| table.expand(t).to_owned()).collect()
}

/// Expanded tokens joined with `_`: `proto` → `protocol`.
pub fn expanded_name(name: &str, table: &AbbreviationTable) -> String {
    expanded_tokens(name, table).join("_")
}

/// Jaccard similarity of the expanded token sets.
pub fn name_similarity(a: &str, b: &str, table: &AbbreviationTable) -> f64 {
    let ta: BTreeSet<String> = expanded_tokens(a, table).into_iter().collect();
    let tb: BTreeSet<String> = expanded_tokens(b, table).into_iter().collect();
    jaccard(&ta, &tb)
}

pub fn value_jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    jaccard(a, b)
}

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeCandidate {
    pub left: String,
    pub right: String,
    pub name_similarity: f64,
    pub value_jaccard: f64,
    pub canonical: String,
}

/// Proposes pairs whose names and sampled value sets both overlap enough.
///
/// The canonical name is the longer expanded form (lexicographically smaller
/// on equal length).
pub fn propose_namespace_merges(
    columns: &[(String, BTreeSet<String>)],
    table: &AbbreviationTable,
) -> Vec<MergeCandidate> {
    let expanded: Vec<(BTreeSet<String>, String)> = columns
        .iter()
        .map(|(name, _)| {
            let tokens = expanded_tokens(name, table);
            (tokens.iter().cloned().collect(), tokens.join("_"))
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..columns.len() {
        for j in i + 1..columns.len() {
            if columns[i].0 == columns[j].0 {
                continue;
            }
            let name_sim = jaccard(&expanded[i].0, &expanded[j].0);
            if name_sim < NAME_SIMILARITY_THRESHOLD {
                continue;
            }
            let value_sim = jaccard(&columns[i].1, &columns[j].1);
            if value_sim < VALUE_JACCARD_THRESHOLD {
                continue;
            }
            out.push(MergeCandidate {
                left: columns[i].0.clone(),
                right: columns[j].0.clone(),
                name_similarity: name_sim,
                value_jaccard: value_sim,
                canonical: preferred(&expanded[i].1, &expanded[j].1).to_owned(),
            });
        }
    }
    out
}

fn preferred<'a>(a: &'a str, b: &'a str) -> &'a str {
    if a.len() > b.len() || (a.len() == b.len() && a <= b) {
        a
    } else {
        b
    }
}

/// Applied merges: old name → canonical, and per-canonical conflict rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MergeOutcome {
    pub renames: BTreeMap<String, String>,
    pub conflicts: BTreeMap<String, usize>,
}

/// Renames merge-group members to the group's canonical name in every frame.
///
/// Candidates sharing a column form one group (transitively). Inside a frame
/// that holds several members, they are coalesced at the first member's
/// position: the first non-null value wins and rows where two non-null
/// values disagree are counted as conflicts.
pub fn apply_merges(frames: &[Frame], candidates: &[MergeCandidate]) -> (Vec<Frame>, MergeOutcome) {
    let mut groups = UnionFind::default();
    for c in candidates.iter().filter(|c| c.left != c.right) {
        groups.union(&c.left, &c.right);
    }
    let mut canonical: HashMap<String, String> = HashMap::new();
    for c in candidates.iter().filter(|c| c.left != c.right) {
        let root = groups.find(&c.left);
        let entry = canonical.entry(root).or_insert_with(|| c.canonical.clone());
        *entry = preferred(entry, &c.canonical).to_owned();
    }
    let mut outcome = MergeOutcome::default();
    let mut target: HashMap<String, String> = HashMap::new();
    for name in groups.names() {
        let root = groups.find(&name);
        let canon = canonical[&root].clone();
        if name != canon {
            outcome.renames.insert(name.clone(), canon.clone());
        }
        target.insert(name, canon);
    }
    let canon_names: BTreeSet<String> = target.values().cloned().collect();
    for canon in &canon_names {
        target.entry(canon.clone()).or_insert_with(|| canon.clone());
    }
    let out = frames
        .iter()
        .map(|frame| merge_frame(frame, &target, &mut outcome.conflicts))
        .collect();
    (out, outcome)
}

fn merge_frame(frame: &Frame, target: &HashMap<String, String>, conflicts: &mut BTreeMap<String, usize>) -> Frame {
    let mut columns: Vec<Column> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    for column in frame.columns() {
        let Some(canon) = target.get(&column.name) else {
            columns.push(column.clone());
            continue;
        };
        match slot.get(canon) {
            None => {
                slot.insert(canon.clone(), columns.len());
                columns.push(Column {
                    name: canon.clone(),
                    source: column.source.clone(),
                    data: column.data.clone(),
                });
            }
            Some(&at) => {
                let (data, clashes) = coalesce(&columns[at].data, &column.data);
                columns[at].data = data;
                if clashes > 0 {
                    *conflicts.entry(canon.clone()).or_default() += clashes;
                }
            }
        }
    }
    Frame::new(frame.name().to_owned(), frame.row_count(), columns).expect("merged columns keep frame shape")
}

/// First non-null wins; differing kinds coalesce as text.
fn coalesce(left: &ColumnData, right: &ColumnData) -> (ColumnData, usize) {
    fn pick<T: Clone + PartialEq>(a: &[Option<T>], b: &[Option<T>], clashes: &mut usize) -> Vec<Option<T>> {
        a.iter()
            .zip(b)
            .map(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => {
                    if x != y {
                        *clashes += 1;
                    }
                    Some(x.clone())
                }
                (Some(x), None) => Some(x.clone()),
                (None, y) => y.clone(),
            })
            .collect()
    }
    let mut clashes = 0;
    let data = match (left, right) {
        (ColumnData::Text(a), ColumnData::Text(b)) => ColumnData::Text(pick(a, b, &mut clashes)),
        (ColumnData::Int(a), ColumnData::Int(b)) => ColumnData::Int(pick(a, b, &mut clashes)),
        (ColumnData::Float(a), ColumnData::Float(b)) => ColumnData::Float(pick(a, b, &mut clashes)),
        (ColumnData::Bool(a), ColumnData::Bool(b)) => ColumnData::Bool(pick(a, b, &mut clashes)),
        (ColumnData::Timestamp(a), ColumnData::Timestamp(b)) => ColumnData::Timestamp(pick(a, b, &mut clashes)),
        (a, b) => ColumnData::Text(pick(&a.keys(), &b.keys(), &mut clashes)),
    };
    (data, clashes)
}

#[derive(Default)]
struct UnionFind {
    index: BTreeMap<String, usize>,
    names: Vec<String>,
    parent: Vec<usize>,
}

impl UnionFind {
    fn id(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.index.insert(name.to_owned(), i);
        self.names.push(name.to_owned());
        self.parent.push(i);
        i
    }

    fn root(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: &str, b: &str) {
        let (ra, rb) = (self.id(a), self.id(b));
        let (ra, rb) = (self.root(ra), self.root(rb));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    fn find(&mut self, name: &str) -> String {
        let i = self.id(name);
        let r = self.root(i);
        self.names[r].clone()
    }

    fn names(&self) -> Vec<String> {
        self.names.clone()
    }
}
