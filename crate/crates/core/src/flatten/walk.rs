use crate::schema::{ClassTable, Container, FieldClass, FieldPath, Segment};
use crate::value::{Scalar, ValueNode, EXACT_INT_LIMIT};

use super::FlattenError;

/// A flattened leaf, converted to a [`Scalar`] only on demand.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Leaf<'v> {
    Value(&'v ValueNode),
    Text(&'v str),
    Part(&'v str),
    Null,
}

impl Leaf<'_> {
    pub(crate) fn to_scalar(self) -> Scalar {
        match self {
            Leaf::Value(node) => node.as_scalar().unwrap_or(Scalar::Null),
            Leaf::Text(text) => Scalar::Text(text.to_owned()),
            Leaf::Part(part) => coerce_part(part),
            Leaf::Null => Scalar::Null,
        }
    }
}

/// Visits every flattened leaf of `record`, in source order.
///
/// Objects and lists recurse, delimited text is split into parts (and the
/// parts re-split when their own pattern is delimited), empty containers
/// produce a null cell under an [`Segment::Empty`] marker.
pub(crate) fn walk_record(
    record: &ValueNode,
    classes: &ClassTable,
    max_depth: usize,
    emit: &mut dyn for<'v> FnMut(&[Segment], Leaf<'v>),
) -> Result<(), FlattenError> {
    let mut walk = Walk {
        classes,
        max_depth,
        concrete: Vec::new(),
        pattern: Vec::new(),
        emit,
    };
    walk.node(record)
}

struct Walk<'a, 'e> {
    classes: &'a ClassTable,
    max_depth: usize,
    concrete: Vec<Segment>,
    pattern: Vec<Segment>,
    emit: &'e mut dyn for<'v> FnMut(&[Segment], Leaf<'v>),
}

impl Walk<'_, '_> {
    fn node(&mut self, value: &ValueNode) -> Result<(), FlattenError> {
        match value {
            ValueNode::Object(map) if map.is_empty() => {
                if !self.concrete.is_empty() {
                    self.marker(Container::Object)?;
                }
            }
            ValueNode::Object(map) => {
                for (key, child) in map {
                    self.push(Segment::Key(key.clone()), Segment::Key(key.clone()))?;
                    self.node(child)?;
                    self.pop();
                }
            }
            ValueNode::Array(items) if items.is_empty() => self.marker(Container::Array)?,
            ValueNode::Array(items) => {
                for (index, item) in items.iter().enumerate() {
                    self.push(Segment::Index(index), Segment::AnyIndex)?;
                    self.node(item)?;
                    self.pop();
                }
            }
            ValueNode::Text(text) => self.text(text, false)?,
            scalar => (self.emit)(&self.concrete, Leaf::Value(scalar)),
        }
        Ok(())
    }

    fn text(&mut self, text: &str, is_part: bool) -> Result<(), FlattenError> {
        if let Some(FieldClass::DelimitedString { delimiter }) = self.classes.get(self.pattern.as_slice()) {
            let delimiter = *delimiter;
            for (index, part) in text.split(delimiter).enumerate() {
                let segment = Segment::Part { index, delimiter };
                self.push(segment.clone(), segment)?;
                self.text(part, true)?;
                self.pop();
            }
            return Ok(());
        }
        let leaf = if is_part { Leaf::Part(text) } else { Leaf::Text(text) };
        (self.emit)(&self.concrete, leaf);
        Ok(())
    }

    fn marker(&mut self, container: Container) -> Result<(), FlattenError> {
        self.push(Segment::Empty(container), Segment::Empty(container))?;
        (self.emit)(&self.concrete, Leaf::Null);
        self.pop();
        Ok(())
    }

    fn push(&mut self, concrete: Segment, pattern: Segment) -> Result<(), FlattenError> {
        if self.concrete.len() >= self.max_depth {
            let mut path = self.concrete.clone();
            path.push(concrete);
            return Err(FlattenError::DepthExceeded {
                path: FieldPath::from_segments(path).to_string(),
                max_depth: self.max_depth,
            });
        }
        self.concrete.push(concrete);
        self.pattern.push(pattern);
        Ok(())
    }

    fn pop(&mut self) {
        self.concrete.pop();
        self.pattern.pop();
    }
}

/// Split parts that are canonical integers become `Int`; everything else
/// stays text. Canonical means the integer prints back to the same text, so
/// rejoining the parts is exact.
pub(crate) fn coerce_part(part: &str) -> Scalar {
    match part.parse::<i64>() {
        Ok(i) if (i.unsigned_abs() as f64) < EXACT_INT_LIMIT && i.to_string() == part => Scalar::Int(i),
        _ => Scalar::Text(part.to_owned()),
    }
}
