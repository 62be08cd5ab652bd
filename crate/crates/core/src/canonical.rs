//! Line-delimited canonical graph encoding.
//!
//! One JSON object per line, tagged by `record_type`, keys in sorted order:
//! the meta record, then nodes, edges and branches in id order, then the
//! action log in log order. Identical content always yields identical bytes.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CoreError, Result};
use crate::graph::{Branch, Edge, GraphAction, IdeaGraph, Node};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("string keys serialize"));
                out.push(':');
                write_value(out, &map[k]);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Compact JSON with object keys sorted at every depth.
pub fn canonical_json_value(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

pub fn canonical_json<T: Serialize>(value: &T) -> String {
    canonical_json_value(&serde_json::to_value(value).expect("in-memory records serialize"))
}

fn tagged<T: Serialize>(record_type: &str, value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("graph records serialize");
    if let Value::Object(map) = &mut v {
        map.insert("record_type".into(), Value::String(record_type.into()));
    }
    canonical_json_value(&v)
}

pub fn serialize(graph: &IdeaGraph) -> Vec<u8> {
    let mut meta = Map::new();
    meta.insert("group_id".into(), Value::String(graph.group_id.clone()));
    meta.insert("round".into(), Value::from(graph.round));
    meta.insert("clock".into(), Value::from(graph.clock));
    let mut lines = vec![tagged("meta", &Value::Object(meta))];
    lines.extend(graph.nodes.values().map(|n| tagged("node", n)));
    lines.extend(graph.edges.values().map(|e| tagged("edge", e)));
    lines.extend(graph.branches.values().map(|b| tagged("branch", b)));
    lines.extend(graph.action_log.iter().map(|a| tagged("action", a)));
    let mut out = lines.join("\n");
    out.push('\n');
    out.into_bytes()
}

pub fn serialize_string(graph: &IdeaGraph) -> String {
    String::from_utf8(serialize(graph)).expect("serializer emits UTF-8")
}

pub fn content_hash(graph: &IdeaGraph) -> String {
    sha256_hex(&serialize(graph))
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> CoreError {
    CoreError::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn take<T: DeserializeOwned>(line: usize, map: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(map)).map_err(|e| parse_err(line, 0, e.to_string()))
}

pub fn deserialize(bytes: &[u8]) -> Result<IdeaGraph> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let upto = &bytes[..e.valid_up_to()];
        let line = upto.iter().filter(|b| **b == b'\n').count() + 1;
        let column = upto.len() - upto.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1) + 1;
        parse_err(line, column, "invalid UTF-8")
    })?;

    let mut graph = IdeaGraph::default();
    let mut saw_meta = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(raw).map_err(|e| parse_err(line, e.column(), e.to_string()))?;
        let Value::Object(mut map) = value else {
            return Err(parse_err(line, 1, "record is not an object"));
        };
        let record_type = match map.remove("record_type") {
            Some(Value::String(s)) => s,
            _ => return Err(parse_err(line, 1, "missing record_type")),
        };
        match record_type.as_str() {
            "meta" => {
                if saw_meta {
                    return Err(parse_err(line, 1, "duplicate meta record"));
                }
                saw_meta = true;
                graph.group_id = map
                    .get("group_id")
                    .and_then(Value::as_str)
                    .ok_or_else(|| parse_err(line, 1, "meta.group_id missing"))?
                    .to_string();
                graph.round = map
                    .get("round")
                    .and_then(Value::as_u64)
                    .and_then(|r| u32::try_from(r).ok())
                    .ok_or_else(|| parse_err(line, 1, "meta.round missing"))?;
                graph.clock = map
                    .get("clock")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| parse_err(line, 1, "meta.clock missing"))?;
            }
            "node" => {
                let node: Node = take(line, map)?;
                if graph.nodes.insert(node.id.clone(), node).is_some() {
                    return Err(parse_err(line, 1, "duplicate node id"));
                }
            }
            "edge" => {
                let edge: Edge = take(line, map)?;
                if graph.edges.insert(edge.id.clone(), edge).is_some() {
                    return Err(parse_err(line, 1, "duplicate edge id"));
                }
            }
            "branch" => {
                let branch: Branch = take(line, map)?;
                if graph.branches.insert(branch.id.clone(), branch).is_some() {
                    return Err(parse_err(line, 1, "duplicate branch id"));
                }
            }
            "action" => graph.action_log.push(take::<GraphAction>(line, map)?),
            other => return Err(parse_err(line, 1, format!("unknown record_type `{other}`"))),
        }
    }
    if !saw_meta {
        return Err(parse_err(text.lines().count() + 1, 1, "missing meta record"));
    }
    graph.check_integrity()?;
    Ok(graph)
}

pub fn deserialize_str(text: &str) -> Result<IdeaGraph> {
    deserialize(text.as_bytes())
}
