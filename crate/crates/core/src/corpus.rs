//! Seeded synthetic honeypot corpus.
//!
//! Each template is a sensor's payload field list. A record carries the
//! template's fields inside a `payload` object next to the shared top-level
//! fields `_id`, `channel`, `ident`, `normalized` and `timestamp`.

use std::io::Write;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::ValueNode;

/// Template entries that are not payload fields: the frame index, the
/// flattened top-level timestamp and the shared top-level fields.
pub const RESERVED_FIELDS: [&str; 4] = ["schemaType", "timestampDate", "ident", "channel"];

/// Top-level fields every record carries besides `channel` and `ident`.
pub const EXTRA_TOP_LEVEL: [&str; 2] = ["normalized", "_id"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Template {
    /// Sensor channel; constant for every record of the template.
    pub channel: String,
    pub fields: Vec<String>,
}

impl Template {
    pub fn payload_fields(&self) -> impl Iterator<Item = &str> {
        self.fields
            .iter()
            .map(String::as_str)
            .filter(|f| !RESERVED_FIELDS.contains(f))
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid templates: {0}")]
    Templates(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn template(channel: &str, fields: &[&str]) -> Template {
    Template {
        channel: channel.to_owned(),
        fields: fields.iter().map(|f| (*f).to_owned()).collect(),
    }
}

/// The thirteen honeypot sensor layouts.
pub fn honeypot_templates() -> Vec<Template> {
    vec![
        template(
            "dionaea.connections",
            &[
                "id",
                "schemaType",
                "remote_host",
                "connection_protocol",
                "local_port",
                "connection_type",
                "remote_hostname",
                "remote_port",
                "local_host",
                "connection_transport",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "p0f.app",
            &[
                "id",
                "schemaType",
                "client_ip",
                "app",
                "timestamp",
                "server_ip",
                "params",
                "raw_sig",
                "dist",
                "client_port",
                "mod",
                "server_port",
                "subject",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "p0f.uptime",
            &[
                "id",
                "schemaType",
                "client_ip",
                "server_ip",
                "timestamp",
                "uptime",
                "subject",
                "client_port",
                "raw_freq",
                "server_port",
                "mod",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "p0f.host_change",
            &[
                "id",
                "schemaType",
                "client_ip",
                "server_ip",
                "timestamp",
                "reason",
                "raw_hits",
                "subject",
                "client_port",
                "mod",
                "server_port",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "p0f.os",
            &[
                "id",
                "schemaType",
                "client_ip",
                "server_ip",
                "timestamp",
                "os",
                "params",
                "raw_sig",
                "dist",
                "client_port",
                "mod",
                "server_port",
                "subject",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "p0f.mtu",
            &[
                "id",
                "schemaType",
                "client_ip",
                "server_ip",
                "timestamp",
                "link",
                "subject",
                "client_port",
                "mod",
                "server_port",
                "raw_mtu",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "cowrie.sessions",
            &[
                "id",
                "schemaType",
                "hostIP",
                "loggedin",
                "commands",
                "unknownCommands",
                "startTime",
                "peerPort",
                "version",
                "urls",
                "session",
                "ttylog",
                "credentials",
                "endTime",
                "peerIP",
                "hostPort",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "glastopf.events",
            &[
                "id",
                "schemaType",
                "sensorid",
                "request_raw",
                "request_url",
                "filename",
                "source",
                "pattern",
                "version",
                "time",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "snort.udp",
            &[
                "id",
                "schemaType",
                "tos",
                "ttl",
                "ethdst",
                "ethetype",
                "udplength",
                "sensor",
                "priority",
                "destination_ip",
                "timestamp",
                "signature",
                "classification",
                "ethlen",
                "dgnlen",
                "destination_port",
                "header",
                "source_port",
                "proto",
                "source_ip",
                "iplen",
                "ethsrc",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "snort.tcp",
            &[
                "id",
                "schemaType",
                "destination_port",
                "timestamp",
                "tcpflags",
                "tcpwin",
                "dgnlen",
                "tcpack",
                "classification",
                "sensor",
                "proto",
                "tcpseq",
                "header",
                "source_ip",
                "iplen",
                "tos",
                "ttl",
                "ethetype",
                "priority",
                "destination_ip",
                "tcpen",
                "ethlen",
                "ethdst",
                "source_port",
                "signature",
                "ethsrc",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "snort.icmp",
            &[
                "id",
                "schemaType",
                "timestamp",
                "destination_ip",
                "dgnlen",
                "classification",
                "sensor",
                "proto",
                "header",
                "source_ip",
                "iplen",
                "tos",
                "ttl",
                "ethetype",
                "priority",
                "icmpcode",
                "icmpseq",
                "ethlen",
                "ethsrc",
                "ethdst",
                "icmpid",
                "signature",
                "icmptype",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "dionaea.capture",
            &[
                "id",
                "schemaType",
                "daddr",
                "md5",
                "url",
                "dport",
                "sport",
                "sha512",
                "saddr",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
        template(
            "elastichoney.events",
            &[
                "id",
                "schemaType",
                "url",
                "@timestamp",
                "honeypot",
                "payloadCommand",
                "headers",
                "method",
                "payloadMd5",
                "form",
                "payloadBinary",
                "payloadResource",
                "type",
                "source",
                "timestampDate",
                "ident",
                "channel",
            ],
        ),
    ]
}

/// Reads templates from a JSON array of `{"channel": …, "fields": [...]}`.
pub fn load_templates(json: &str) -> Result<Vec<Template>, CorpusError> {
    let templates: Vec<Template> = serde_json::from_str(json).map_err(|e| CorpusError::Templates(e.to_string()))?;
    for (i, t) in templates.iter().enumerate() {
        if t.channel.is_empty() {
            return Err(CorpusError::Templates(format!("template {i} has an empty channel")));
        }
        let mut seen = std::collections::HashSet::new();
        for f in &t.fields {
            if f.is_empty() || !seen.insert(f.as_str()) {
                return Err(CorpusError::Templates(format!(
                    "template {i} has an empty or repeated field `{f}`"
                )));
            }
        }
    }
    Ok(templates)
}

const TIME_FIELDS: [&str; 5] = ["timestamp", "startTime", "endTime", "time", "@timestamp"];
const LIST_FIELDS: [&str; 4] = ["commands", "unknownCommands", "urls", "credentials"];
const IP_FIELDS: [&str; 12] = [
    "remote_host",
    "local_host",
    "client_ip",
    "server_ip",
    "hostIP",
    "peerIP",
    "destination_ip",
    "source_ip",
    "daddr",
    "saddr",
    "remote_hostname",
    "source",
];
const INT_FIELDS: [&str; 30] = [
    "local_port",
    "remote_port",
    "client_port",
    "server_port",
    "peerPort",
    "hostPort",
    "destination_port",
    "source_port",
    "dport",
    "sport",
    "dist",
    "uptime",
    "raw_freq",
    "raw_hits",
    "raw_mtu",
    "tos",
    "ttl",
    "udplength",
    "priority",
    "ethlen",
    "dgnlen",
    "iplen",
    "tcpwin",
    "tcpack",
    "tcpseq",
    "tcpen",
    "icmpcode",
    "icmpseq",
    "icmpid",
    "icmptype",
];

/// FNV-1a; gives every field name its own value pool.
fn field_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn hex(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len)
        .map(|_| char::from_digit(rng.gen_range(0..16), 16).unwrap())
        .collect()
}

fn instant(rng: &mut ChaCha8Rng) -> DateTime<Utc> {
    let start = Utc.with_ymd_and_hms(2016, 7, 1, 0, 0, 0).unwrap().timestamp();
    let secs = start + rng.gen_range(0..90 * 86_400);
    DateTime::from_timestamp(secs, rng.gen_range(0..1_000_000_000)).unwrap()
}

fn field_value(name: &str, rng: &mut ChaCha8Rng) -> ValueNode {
    let h = field_hash(name);
    if TIME_FIELDS.contains(&name) {
        let t = instant(rng).with_timezone(&chrono::FixedOffset::east_opt(2 * 3600).unwrap());
        return ValueNode::Text(t.to_rfc3339_opts(SecondsFormat::Nanos, false));
    }
    if LIST_FIELDS.contains(&name) {
        let len = rng.gen_range(1..=3);
        return ValueNode::Array((0..len).map(|_| list_item(name, rng)).collect());
    }
    if IP_FIELDS.contains(&name) {
        return ValueNode::Text(format!("10.{}.{}.{}", (h >> 8) % 256, h % 256, rng.gen_range(1..255)));
    }
    if INT_FIELDS.contains(&name) {
        return ValueNode::Int(rng.gen_range(0..65_536));
    }
    let text = match name {
        "proto" => ["tcp", "udp", "icmp"][rng.gen_range(0..3)].to_owned(),
        "connection_protocol" => ["tcp", "udp", "smbd"][rng.gen_range(0..3)].to_owned(),
        "id" => format!("p{}", hex(rng, 15)),
        "md5" | "payloadMd5" => hex(rng, 32),
        "sha512" => hex(rng, 128),
        "raw_sig" => format!(
            "4:{}+{}:0:{},{}:{}:{}",
            [64, 128, 255][rng.gen_range(0..3)],
            rng.gen_range(0..3),
            [1024, 1460, 1380][rng.gen_range(0..3)],
            rng.gen_range(0..8),
            ["df", "mss", "ts"][rng.gen_range(0..3)],
            rng.gen_range(0..2)
        ),
        "url" | "request_url" | "payloadResource" => {
            format!("http://{}.example/{}", h % 10_000, rng.gen_range(0..20))
        }
        "version" => format!("{}.{}", rng.gen_range(1..3), rng.gen_range(0..10)),
        "loggedin" => ["yes", "no"][rng.gen_range(0..2)].to_owned(),
        _ => format!("{name}-{}", rng.gen_range(0..6)),
    };
    ValueNode::Text(text)
}

fn list_item(name: &str, rng: &mut ChaCha8Rng) -> ValueNode {
    ValueNode::Text(match name {
        "commands" => ["ls", "pwd", "uname -a", "wget", "cat /etc/passwd"][rng.gen_range(0..5)].to_owned(),
        "unknownCommands" => format!("unk{}", rng.gen_range(0..10)),
        "urls" => format!(
            "http://{}.dl.example/{}",
            field_hash(name) % 10_000,
            rng.gen_range(0..10)
        ),
        _ => format!("user{}:pass{}", rng.gen_range(0..5), rng.gen_range(0..5)),
    })
}

fn record(template: &Template, rng: &mut ChaCha8Rng) -> ValueNode {
    let mut payload = IndexMap::new();
    for field in template.payload_fields() {
        payload.insert(field.to_owned(), field_value(field, rng));
    }
    let mut top = IndexMap::new();
    top.insert(
        "_id".to_owned(),
        ValueNode::Object(IndexMap::from([("$oid".to_owned(), ValueNode::Text(hex(rng, 24)))])),
    );
    top.insert("channel".to_owned(), ValueNode::Text(template.channel.clone()));
    top.insert(
        "ident".to_owned(),
        ValueNode::Text(format!("ident-{}", rng.gen_range(0..4))),
    );
    top.insert("normalized".to_owned(), ValueNode::Bool(true));
    top.insert("payload".to_owned(), ValueNode::Object(payload));
    let date = instant(rng).to_rfc3339_opts(SecondsFormat::Millis, true);
    top.insert(
        "timestamp".to_owned(),
        ValueNode::Object(IndexMap::from([("$date".to_owned(), ValueNode::Text(date))])),
    );
    ValueNode::Object(top)
}

/// `records_per_schema` records per template, shuffled; identical output
/// for identical arguments.
pub fn generate_corpus(seed: u64, records_per_schema: usize, templates: &[Template]) -> Vec<ValueNode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(records_per_schema * templates.len());
    for template in templates {
        for _ in 0..records_per_schema {
            records.push(record(template, &mut rng));
        }
    }
    records.shuffle(&mut rng);
    records
}

/// Writes the corpus as JSON Lines; returns the number of lines.
pub fn write_corpus<W: Write>(
    sink: &mut W,
    seed: u64,
    records_per_schema: usize,
    templates: &[Template],
) -> Result<usize, CorpusError> {
    let records = generate_corpus(seed, records_per_schema, templates);
    for record in &records {
        sink.write_all(record.to_json_string().as_bytes())?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(records.len())
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeSet, HashMap};

    use super::*;

    #[test]
    fn thirteen_distinct_templates() {
        let templates = honeypot_templates();
        assert_eq!(templates.len(), 13);
        let sets: BTreeSet<BTreeSet<&str>> = templates.iter().map(|t| t.payload_fields().collect()).collect();
        assert_eq!(sets.len(), 13);
    }

    #[test]
    fn deterministic() {
        let templates = honeypot_templates();
        let mut a = Vec::new();
        let mut b = Vec::new();
        assert_eq!(write_corpus(&mut a, 42, 100, &templates).unwrap(), 1300);
        write_corpus(&mut b, 42, 100, &templates).unwrap();
        assert_eq!(a, b);
        let mut one = Vec::new();
        assert_eq!(write_corpus(&mut one, 1, 1, &templates[..1]).unwrap(), 1);
    }

    #[test]
    fn text_pools_do_not_overlap_across_fields() {
        let templates = honeypot_templates();
        let records = generate_corpus(7, 50, &templates);
        let mut owner: HashMap<String, String> = HashMap::new();
        for rec in &records {
            let payload = rec.as_object().unwrap()["payload"].as_object().unwrap();
            for (field, value) in payload {
                if let ValueNode::Text(s) = value {
                    if field == "proto" || field == "connection_protocol" || field == "version" {
                        continue;
                    }
                    let prev = owner.entry(s.clone()).or_insert_with(|| field.clone());
                    assert_eq!(prev, field, "value `{s}` shared");
                }
            }
        }
    }

    #[test]
    fn template_json() {
        let ts = load_templates(r#"[{"channel":"c","fields":["a","b"]}]"#).unwrap();
        assert_eq!(ts[0].fields, vec!["a", "b"]);
        assert!(load_templates(r#"[{"channel":"c","fields":["a","a"]}]"#).is_err());
        assert!(load_templates(r#"[{"channel":"c"}]"#).is_err());
    }
}
