#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use logfeat::ValueNode;

/// Shape of one field inside a record family.
#[derive(Debug, Clone)]
pub enum Shape {
    Int,
    Float,
    Text,
    Bool,
    Delimited {
        delimiter: char,
        parts: Vec<Shape>,
    },
    Struct {
        fields: Vec<(String, Shape)>,
        optional: bool,
    },
    List(Box<Shape>),
}

fn random_shape(rng: &mut ChaCha8Rng, prefix: &str, depth: usize) -> Shape {
    let choice = if depth == 0 {
        rng.gen_range(0..5)
    } else {
        rng.gen_range(0..7)
    };
    match choice {
        0 => Shape::Int,
        1 => Shape::Float,
        2 => Shape::Text,
        3 => Shape::Bool,
        4 => {
            let delimiter = *[':', ',', ';', '|'].choose(rng).unwrap();
            let parts = (0..rng.gen_range(2..5))
                .map(|_| if rng.gen_bool(0.5) { Shape::Int } else { Shape::Text })
                .collect();
            Shape::Delimited { delimiter, parts }
        }
        5 => {
            let n = rng.gen_range(1..4);
            let fields = (0..n)
                .map(|i| {
                    let name = format!("{prefix}{i}");
                    let child = random_shape(rng, &format!("{name}_"), depth - 1);
                    (name, child)
                })
                .collect();
            Shape::Struct {
                fields,
                optional: rng.gen_bool(0.3),
            }
        }
        _ => Shape::List(Box::new(random_shape(rng, &format!("{prefix}e_"), depth - 1))),
    }
}

fn word(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789 _-";
    let len = rng.gen_range(0..8);
    let mut s: String = (0..len)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
        .collect();
    if rng.gen_bool(0.05) {
        s.push(*[':', ',', ';', '|'].choose(rng).unwrap());
    }
    s
}

fn part(rng: &mut ChaCha8Rng, shape: &Shape) -> String {
    match shape {
        Shape::Int => rng.gen_range(0..1000).to_string(),
        _ => {
            const ALPHABET: &[u8] = b"abcdefghij0123456789+-. ";
            let len = rng.gen_range(0..5);
            (0..len)
                .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
                .collect()
        }
    }
}

fn value(rng: &mut ChaCha8Rng, shape: &Shape) -> Value {
    if !matches!(shape, Shape::Struct { .. } | Shape::List(_)) && rng.gen_bool(0.03) {
        return Value::Null;
    }
    match shape {
        Shape::Int => json!(rng.gen_range(-1000i64..1000)),
        Shape::Float => json!(rng.gen_range(-1000..1000) as f64 + 0.25 + f64::from(rng.gen_range(0..4)) * 0.125),
        Shape::Text => json!(word(rng)),
        Shape::Bool => json!(rng.gen_bool(0.5)),
        Shape::Delimited { delimiter, parts } => {
            let text: Vec<String> = parts.iter().map(|p| part(rng, p)).collect();
            json!(text.join(&delimiter.to_string()))
        }
        Shape::Struct { fields, optional } => {
            let mut map = Map::new();
            for (name, child) in fields {
                if *optional && rng.gen_bool(0.4) {
                    continue;
                }
                map.insert(name.clone(), value(rng, child));
            }
            Value::Object(map)
        }
        Shape::List(item) => Value::Array((0..rng.gen_range(0..4)).map(|_| value(rng, item)).collect()),
    }
}

/// `n` records drawn from `families` seeded record shapes that share a
/// `payload` dictionary union, nesting depth at most 4.
pub fn random_records(seed: u64, families: usize, n: usize) -> Vec<ValueNode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes: Vec<Vec<(String, Shape)>> = (0..families)
        .map(|f| {
            (0..rng.gen_range(1..4))
                .map(|i| {
                    let name = format!("f{f}k{i}");
                    let shape = random_shape(&mut rng, &format!("{name}_"), 2);
                    (name, shape)
                })
                .collect()
        })
        .collect();
    (0..n)
        .map(|i| {
            let family = &shapes[rng.gen_range(0..families)];
            let mut payload = Map::new();
            for (name, shape) in family {
                payload.insert(name.clone(), value(&mut rng, shape));
            }
            let record = json!({
                "seq": i,
                "meta": {"$oid": format!("{:08x}", rng.gen::<u32>())},
                "payload": Value::Object(payload),
            });
            ValueNode::from_json(record)
        })
        .collect()
}
