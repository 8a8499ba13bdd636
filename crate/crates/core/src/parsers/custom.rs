//! User-mapped JSON records (one array, or one object per line).

use std::collections::BTreeMap;

use glob::Pattern;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{ident, synthesized_source, Builder, ParseError, ParseReport, SOURCE_QUALIFIER};
use crate::model::{AttributeValue, CoreEvent, CoreObject, Identifier, ObjectClass, Timestamp};
use crate::validation::{Code, Diagnostic};

/// Maps an object-bearing field, by name, to an object class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassRule {
    /// Glob over the field name, e.g. `"order*"`.
    pub pattern: String,
    pub class: ObjectClass,
}

/// How source fields bind to the metamodel.
///
/// A record whose `activity_key` field is a non-empty string is a process
/// event. Otherwise it is an observation if it carries any of
/// `observation_attribute_keys`, else an IoT event labeled `iot_event`.
/// Each field in `object_keys` names related objects (a string, a number or
/// an array of them); the field name is the object type and the first
/// matching rule in `object_class_rules` its class. Fields not consumed by a
/// rule become event attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingConfig {
    pub activity_key: String,
    pub timestamp_key: String,
    pub id_key: Option<String>,
    pub resource_key: Option<String>,
    pub observation_attribute_keys: Vec<String>,
    pub object_keys: Vec<String>,
    pub object_class_rules: Vec<ClassRule>,
    /// Keys: `object` (default: the field name), `resource` and
    /// `data_source`.
    pub qualifier_defaults: BTreeMap<String, String>,
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self {
            activity_key: "concept:name".into(),
            timestamp_key: "time:timestamp".into(),
            id_key: None,
            resource_key: None,
            observation_attribute_keys: Vec::new(),
            object_keys: Vec::new(),
            object_class_rules: Vec::new(),
            qualifier_defaults: BTreeMap::new(),
        }
    }
}

pub const UNMAPPED: &str = "unmapped";
pub const DEFAULT_IOT_LABEL: &str = "iot_event";

impl MappingConfig {
    fn compile(&self) -> Result<Vec<(Pattern, ObjectClass)>, ParseError> {
        let err = |rule: &str, message: &str| ParseError::MappingError { rule: rule.into(), message: message.into() };
        if self.activity_key.is_empty() {
            return Err(err("activity_key", "must not be empty"));
        }
        if self.timestamp_key.is_empty() {
            return Err(err("timestamp_key", "must not be empty"));
        }
        self.object_class_rules
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Pattern::new(&r.pattern)
                    .map(|p| (p, r.class.clone()))
                    .map_err(|e| err(&format!("object_class_rules[{i}]"), &e.to_string()))
            })
            .collect()
    }

    fn qualifier(&self, kind: &str, fallback: &str) -> String {
        self.qualifier_defaults.get(kind).cloned().unwrap_or_else(|| fallback.to_string())
    }
}

/// Source location and the JSON object found there.
type Record = (String, Map<String, Value>);

fn records(bytes: &[u8]) -> Result<Vec<Record>, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::NotUtf8 { valid_up_to: e.valid_up_to() })?;
    let malformed = |location: String, message: String| ParseError::MalformedInput { location, message };
    let as_object = |location: String, v: Value| match v {
        Value::Object(m) => Ok((location, m)),
        other => Err(malformed(location, format!("expected a JSON object, found {other}"))),
    };
    if text.trim_start().starts_with('[') {
        let values: Vec<Value> = serde_json::from_str(text)
            .map_err(|e| malformed(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        values.into_iter().enumerate().map(|(i, v)| as_object(format!("record {}", i + 1), v)).collect()
    } else {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                let location = format!("line {}", i + 1);
                let v = serde_json::from_str(l).map_err(|e| malformed(location.clone(), e.to_string()))?;
                as_object(location, v)
            })
            .collect()
    }
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Non-scalar JSON is kept as its serialized text.
fn attribute(v: &Value) -> AttributeValue {
    AttributeValue::from_json(v)
        .filter(AttributeValue::is_finite)
        .unwrap_or_else(|| AttributeValue::Text(v.to_string()))
}

pub fn parse_custom(bytes: &[u8], mapping: &MappingConfig) -> Result<ParseReport, ParseError> {
    let rules = mapping.compile()?;
    let records = records(bytes)?;
    let mut b = Builder::new();
    if records.is_empty() {
        b.note(Diagnostic::log_level(Code::W005, "document holds no records"));
    }
    let source = synthesized_source(bytes, "custom");
    let mut source_used = false;

    for (index, (location, mut fields)) in records.into_iter().enumerate() {
        let id = match mapping.id_key.as_ref().and_then(|k| fields.remove(k)) {
            Some(v) => {
                let raw = scalar_text(&v).ok_or_else(|| ParseError::MalformedInput {
                    location: location.clone(),
                    message: format!("id must be a string or number, found {v}"),
                })?;
                ident(&raw, &location).map_err(|e| ParseError::MalformedInput { location: location.clone(), message: e.to_string() })?
            }
            None => Identifier::new(format!("r{}", index + 1)).expect("non-empty"),
        };
        let time = match fields.remove(&mapping.timestamp_key) {
            Some(Value::String(raw)) => super::xes::timestamp(&raw, &id, &mut b),
            Some(Value::Number(n)) => n.as_i64().and_then(Timestamp::from_unix_millis),
            _ => None,
        };
        let Some(time) = time else {
            b.skip(Some(Diagnostic::about(Code::W006, &id, format!("record {location} has no readable {}", mapping.timestamp_key))));
            continue;
        };

        let mut links: Vec<(Identifier, String)> = Vec::new();
        let mut has_data_source = false;
        for key in &mapping.object_keys {
            let Some(v) = fields.remove(key) else { continue };
            let ids: Vec<Value> = match v {
                Value::Array(items) => items,
                Value::Null => Vec::new(),
                other => vec![other],
            };
            let class = rules
                .iter()
                .find(|(p, _)| p.matches(key))
                .map(|(_, c)| c.clone())
                .unwrap_or_else(|| ObjectClass::Other(UNMAPPED.into()));
            for raw in ids {
                let Some(raw) = scalar_text(&raw) else {
                    return Err(ParseError::MalformedInput {
                        location,
                        message: format!("field {key:?} must hold object ids"),
                    });
                };
                let object = ident(&raw, &location)
                    .map_err(|e| ParseError::MalformedInput { location: location.clone(), message: e.to_string() })?;
                has_data_source |= class.is_data_source();
                b.object_once(CoreObject::new(object.clone(), key.as_str(), class.clone()));
                links.push((object, mapping.qualifier("object", key)));
            }
        }
        if let Some(key) = &mapping.resource_key {
            if let Some(raw) = fields.remove(key).as_ref().and_then(scalar_text) {
                let object = ident(&raw, &location)
                    .map_err(|e| ParseError::MalformedInput { location: location.clone(), message: e.to_string() })?;
                b.object_once(CoreObject::new(object.clone(), "resource", ObjectClass::Resource));
                links.push((object, mapping.qualifier("resource", "resource")));
            }
        }
        if !has_data_source {
            source_used = true;
            links.push((source.object_id.clone(), mapping.qualifier("data_source", SOURCE_QUALIFIER)));
        }

        let activity = match fields.get(&mapping.activity_key) {
            Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
            _ => None,
        };
        let mut event = match activity {
            Some(a) => {
                fields.remove(&mapping.activity_key);
                CoreEvent::process(id, time, a)
            }
            None if mapping.observation_attribute_keys.iter().any(|k| fields.contains_key(k)) => {
                CoreEvent::observation(id, time)
            }
            None => CoreEvent::iot(id, time, DEFAULT_IOT_LABEL),
        };
        event.attributes = fields.iter().map(|(k, v)| (k.clone(), attribute(v))).collect();
        b.event(event, links);
    }
    if source_used {
        b.object(source);
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EventClass;

    #[test]
    fn empty_activity_key_is_rejected() {
        let mapping = MappingConfig { activity_key: String::new(), ..MappingConfig::default() };
        assert!(matches!(parse_custom(b"[]", &mapping), Err(ParseError::MappingError { rule, .. }) if rule == "activity_key"));
    }

    #[test]
    fn bad_glob_is_rejected() {
        let mapping = MappingConfig {
            object_class_rules: vec![ClassRule { pattern: "[".into(), class: ObjectClass::CaseObject }],
            ..MappingConfig::default()
        };
        assert!(matches!(parse_custom(b"[]", &mapping), Err(ParseError::MappingError { .. })));
    }

    #[test]
    fn json_lines_and_classes() {
        let mapping = MappingConfig {
            observation_attribute_keys: vec!["temp".into()],
            object_keys: vec!["room".into()],
            object_class_rules: vec![ClassRule { pattern: "ro*".into(), class: ObjectClass::ContextObject }],
            ..MappingConfig::default()
        };
        let doc = b"{\"time:timestamp\":\"2024-01-01T00:00:00Z\",\"temp\":20.5,\"room\":\"r1\"}\n\n{\"time:timestamp\":1000,\"room\":[\"r1\",\"r2\"],\"extra\":{\"a\":1}}\n";
        let report = parse_custom(doc, &mapping).unwrap();
        assert_eq!(report.log.event("r1").unwrap().event_class, EventClass::Observation);
        let second = report.log.event("r2").unwrap();
        assert_eq!(second.event_class, EventClass::IotEvent);
        assert_eq!(second.attributes["extra"], AttributeValue::Text("{\"a\":1}".into()));
        assert_eq!(report.log.object("r2").unwrap().object_class, ObjectClass::ContextObject);
        assert!(!report.has_errors(), "{:?}", report.diagnostics);
    }

    #[test]
    fn malformed_line_is_located() {
        let err = parse_custom(b"{\"a\":1}\n{oops\n", &MappingConfig::default()).unwrap_err();
        assert!(matches!(err, ParseError::MalformedInput { ref location, .. } if location == "line 2"), "{err}");
    }
}
