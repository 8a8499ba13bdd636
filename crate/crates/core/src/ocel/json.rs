//! OCEL 2.0 JSON interchange.
//!
//! Keys are written in sorted order and arrays in document order, so a
//! canonical document always serializes to the same bytes.

use std::io::{self, Read, Write};

use serde_json::{Map, Value};

use super::document::{
    AttributeDecl, EventAttribute, ObjectAttribute, OcelDocument, OcelEvent, OcelObject, Relationship, TypeSchema,
};
use super::error::DecodeError;
use crate::model::{AttributeValue, Identifier, Timestamp};
use crate::validation::{Code, Diagnostic};

const TOP_LEVEL: [&str; 4] = ["objectTypes", "eventTypes", "objects", "events"];

pub fn to_json_value(doc: &OcelDocument) -> Value {
    let mut root = Map::new();
    root.insert("objectTypes".into(), Value::Array(doc.object_types.iter().map(schema_json).collect()));
    root.insert("eventTypes".into(), Value::Array(doc.event_types.iter().map(schema_json).collect()));
    root.insert("objects".into(), Value::Array(doc.objects.iter().map(object_json).collect()));
    root.insert("events".into(), Value::Array(doc.events.iter().map(event_json).collect()));
    Value::Object(root)
}

/// Pretty-printed with a trailing newline.
pub fn write_json<W: Write>(doc: &OcelDocument, mut sink: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut sink, &to_json_value(doc))?;
    sink.write_all(b"\n")?;
    sink.flush()
}

pub fn to_json_bytes(doc: &OcelDocument) -> Vec<u8> {
    let mut out = Vec::new();
    write_json(doc, &mut out).expect("writing to a Vec cannot fail");
    out
}

/// Parses a document. Unknown top-level members are skipped with a W006
/// warning and offset-less timestamps are read as UTC with W002.
pub fn read_json<R: Read>(mut source: R) -> Result<(OcelDocument, Vec<Diagnostic>), DecodeError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let root: Value = serde_json::from_slice(&bytes).map_err(|e| DecodeError::Syntax {
        offset: byte_offset(&bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let mut reader = JsonReader { diagnostics: Vec::new() };
    let doc = reader.document(&root)?;
    Ok((doc, reader.diagnostics))
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let line_start = bytes
        .split_inclusive(|b| *b == b'\n')
        .take(line.saturating_sub(1))
        .map(<[u8]>::len)
        .sum::<usize>();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

fn schema_json(schema: &TypeSchema) -> Value {
    let attributes = schema
        .attributes
        .iter()
        .map(|a| obj([("name", Value::from(a.name.clone())), ("type", Value::from(a.value_type.clone()))]))
        .collect();
    obj([("name", Value::from(schema.name.clone())), ("attributes", Value::Array(attributes))])
}

fn relationships_json(rels: &[Relationship]) -> Value {
    Value::Array(
        rels.iter()
            .map(|r| obj([("objectId", Value::from(r.object_id.as_str())), ("qualifier", Value::from(r.qualifier.clone()))]))
            .collect(),
    )
}

fn object_json(o: &OcelObject) -> Value {
    let attributes = o
        .attributes
        .iter()
        .map(|a| {
            obj([
                ("name", Value::from(a.name.clone())),
                ("time", Value::from(a.time.to_canonical_string())),
                ("value", a.value.to_json()),
            ])
        })
        .collect();
    obj([
        ("id", Value::from(o.id.as_str())),
        ("type", Value::from(o.object_type.clone())),
        ("attributes", Value::Array(attributes)),
        ("relationships", relationships_json(&o.relationships)),
    ])
}

fn event_json(e: &OcelEvent) -> Value {
    let attributes = e
        .attributes
        .iter()
        .map(|a| obj([("name", Value::from(a.name.clone())), ("value", a.value.to_json())]))
        .collect();
    obj([
        ("id", Value::from(e.id.as_str())),
        ("type", Value::from(e.event_type.clone())),
        ("time", Value::from(e.time.to_canonical_string())),
        ("attributes", Value::Array(attributes)),
        ("relationships", relationships_json(&e.relationships)),
    ])
}

fn obj<const N: usize>(entries: [(&str, Value); N]) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

struct JsonReader {
    diagnostics: Vec<Diagnostic>,
}

fn mismatch(path: &str, expected: &str) -> DecodeError {
    DecodeError::TypeMismatch { path: path.to_string(), expected: expected.to_string() }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, DecodeError> {
    v.as_object().ok_or_else(|| mismatch(path, "object"))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, DecodeError> {
    m.get(key).ok_or_else(|| mismatch(&format!("{path}.{key}"), "member to be present"))
}

fn string_field<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a str, DecodeError> {
    field(m, key, path)?.as_str().ok_or_else(|| mismatch(&format!("{path}.{key}"), "string"))
}

/// Optional array member; absent means empty.
fn array_field<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a [Value], DecodeError> {
    match m.get(key) {
        None => Ok(&[]),
        Some(v) => v.as_array().map(Vec::as_slice).ok_or_else(|| mismatch(&format!("{path}.{key}"), "array")),
    }
}

fn identifier(m: &Map<String, Value>, key: &str, path: &str) -> Result<Identifier, DecodeError> {
    let raw = string_field(m, key, path)?;
    Identifier::new(raw).map_err(|e| DecodeError::InvalidValue { path: format!("{path}.{key}"), message: e.to_string() })
}

fn value(v: &Value, path: &str) -> Result<AttributeValue, DecodeError> {
    AttributeValue::from_json(v).ok_or_else(|| mismatch(path, "scalar value within 64-bit integer range"))
}

impl JsonReader {
    fn document(&mut self, root: &Value) -> Result<OcelDocument, DecodeError> {
        let m = as_object(root, "$")?;
        for key in m.keys().filter(|k| !TOP_LEVEL.contains(&k.as_str())) {
            self.diagnostics.push(Diagnostic::log_level(Code::W006, format!("unknown top-level member {key:?} ignored")));
        }
        let schemas = |key: &str| -> Result<Vec<TypeSchema>, DecodeError> {
            array_field(m, key, "$")?
                .iter()
                .enumerate()
                .map(|(i, v)| schema(v, &format!("$.{key}[{i}]")))
                .collect()
        };
        let object_types = schemas("objectTypes")?;
        let event_types = schemas("eventTypes")?;
        let objects = array_field(m, "objects", "$")?
            .iter()
            .enumerate()
            .map(|(i, v)| self.object(v, &format!("$.objects[{i}]")))
            .collect::<Result<_, _>>()?;
        let events = array_field(m, "events", "$")?
            .iter()
            .enumerate()
            .map(|(i, v)| self.event(v, &format!("$.events[{i}]")))
            .collect::<Result<_, _>>()?;
        Ok(OcelDocument { object_types, event_types, objects, events })
    }

    fn time(&mut self, raw: &str, record: &Identifier, path: &str) -> Result<Timestamp, DecodeError> {
        let parsed = Timestamp::parse_lenient(raw)
            .map_err(|e| DecodeError::InvalidValue { path: path.to_string(), message: e.to_string() })?;
        if parsed.assumed_utc {
            self.diagnostics.push(Diagnostic::about(Code::W002, record, format!("timestamp {raw:?} has no offset; read as UTC")));
        }
        Ok(parsed.timestamp)
    }

    fn object(&mut self, v: &Value, path: &str) -> Result<OcelObject, DecodeError> {
        let m = as_object(v, path)?;
        let id = identifier(m, "id", path)?;
        let object_type = string_field(m, "type", path)?.to_string();
        let mut attributes = Vec::new();
        for (i, a) in array_field(m, "attributes", path)?.iter().enumerate() {
            let p = format!("{path}.attributes[{i}]");
            let am = as_object(a, &p)?;
            let time = self.time(string_field(am, "time", &p)?, &id, &format!("{p}.time"))?;
            attributes.push(ObjectAttribute {
                name: string_field(am, "name", &p)?.to_string(),
                time,
                value: value(field(am, "value", &p)?, &format!("{p}.value"))?,
            });
        }
        let relationships = relationships(array_field(m, "relationships", path)?, path)?;
        Ok(OcelObject { id, object_type, attributes, relationships })
    }

    fn event(&mut self, v: &Value, path: &str) -> Result<OcelEvent, DecodeError> {
        let m = as_object(v, path)?;
        let id = identifier(m, "id", path)?;
        let event_type = string_field(m, "type", path)?.to_string();
        let time = self.time(string_field(m, "time", path)?, &id, &format!("{path}.time"))?;
        let mut attributes = Vec::new();
        for (i, a) in array_field(m, "attributes", path)?.iter().enumerate() {
            let p = format!("{path}.attributes[{i}]");
            let am = as_object(a, &p)?;
            attributes.push(EventAttribute {
                name: string_field(am, "name", &p)?.to_string(),
                value: value(field(am, "value", &p)?, &format!("{p}.value"))?,
            });
        }
        let relationships = relationships(array_field(m, "relationships", path)?, path)?;
        Ok(OcelEvent { id, event_type, time, attributes, relationships })
    }
}

fn schema(v: &Value, path: &str) -> Result<TypeSchema, DecodeError> {
    let m = as_object(v, path)?;
    let attributes = array_field(m, "attributes", path)?
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let p = format!("{path}.attributes[{i}]");
            let am = as_object(a, &p)?;
            Ok(AttributeDecl {
                name: string_field(am, "name", &p)?.to_string(),
                value_type: string_field(am, "type", &p)?.to_string(),
            })
        })
        .collect::<Result<_, DecodeError>>()?;
    Ok(TypeSchema { name: string_field(m, "name", path)?.to_string(), attributes })
}

fn relationships(values: &[Value], path: &str) -> Result<Vec<Relationship>, DecodeError> {
    values
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = format!("{path}.relationships[{i}]");
            let rm = as_object(r, &p)?;
            Ok(Relationship {
                object_id: identifier(rm, "objectId", &p)?,
                qualifier: string_field(rm, "qualifier", &p)?.to_string(),
            })
        })
        .collect()
}
