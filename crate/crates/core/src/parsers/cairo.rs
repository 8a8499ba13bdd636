//! Trace-structured CAIRO logs in XES-style XML.
//!
//! Each trace is a case object. An event with a `concept:name` label becomes
//! an IoT event of that type; an unlabeled event is a raw reading and becomes
//! an observation (counted under `reclassified_observations`). Ambiguity
//! annotations are kept uninterpreted under `cairo:ambiguity:<key>`.

use std::collections::BTreeMap;

use super::xes::{flatten_into, split_children, timestamp, XesValue};
use super::xml::{parse_document, Element};
use super::{ident, synthesized_source, Builder, ParseError, ParseReport, CASE_QUALIFIER, SOURCE_QUALIFIER};
use crate::model::{AttributeValue, CoreEvent, CoreObject, ObjectClass, Timestamp};
use crate::validation::{Code, Diagnostic};

pub const AMBIGUITY_PREFIX: &str = "cairo:ambiguity:";
const AMBIGUITY_KEYS: [&str; 2] = ["ambiguity", "cairo:ambiguity"];

pub fn parse_cairo(bytes: &[u8]) -> Result<ParseReport, ParseError> {
    let malformed = |location: &str, message: String| ParseError::MalformedInput { location: location.into(), message };
    let root = match parse_document(bytes) {
        Ok(Some(root)) => root,
        Ok(None) => return Err(malformed("byte 0", "document has no root element".into())),
        Err(ParseError::MalformedXml { position, message }) => return Err(malformed(&format!("byte {position}"), message)),
        Err(other) => return Err(other),
    };
    if root.name != "log" {
        return Err(malformed("/", format!("root element is <{}>, expected <log>", root.name)));
    }
    let (attrs, others) = split_children(&root, "/log").map_err(as_malformed)?;

    let mut builder = Builder::new();
    let mut metadata = BTreeMap::new();
    flatten_into("", &attrs, &mut metadata);
    for (k, v) in metadata {
        builder.metadata(k, v);
    }
    let source = synthesized_source(bytes, "cairo");
    let mut source_used = false;
    let mut traces = 0;
    for el in others {
        match el.name.as_str() {
            "trace" => {
                traces += 1;
                source_used |= trace(&mut builder, el, traces, &source).map_err(as_malformed)?;
            }
            "extension" | "global" | "classifier" => {}
            other => builder.note(Diagnostic::log_level(Code::W006, format!("<{other}> element ignored"))),
        }
    }
    if traces == 0 {
        builder.note(Diagnostic::log_level(Code::W005, "document holds no traces"));
    }
    if source_used {
        builder.object(source);
    }
    Ok(builder.finish())
}

fn as_malformed(e: ParseError) -> ParseError {
    match e {
        ParseError::SchemaViolation { path, message } => ParseError::MalformedInput { location: path, message },
        other => other,
    }
}

/// Returns whether any event of the trace links the synthesized source.
fn trace(builder: &mut Builder, el: &Element, index: usize, source: &CoreObject) -> Result<bool, ParseError> {
    let path = format!("/log/trace[{index}]");
    let (attrs, others) = split_children(el, &path)?;
    let mut case_attrs = BTreeMap::new();
    let mut name = None;
    for a in &attrs {
        if a.key == "concept:name" && matches!(a.value, XesValue::Scalar(_)) {
            name = a.as_text();
        } else {
            flatten_into("", std::slice::from_ref(a), &mut case_attrs);
        }
    }
    let name = name.unwrap_or_else(|| format!("trace-{index}"));
    let case_id = ident(&name, &path)?;
    let mut case = CoreObject::new(case_id.clone(), "Case", ObjectClass::CaseObject);
    for (k, v) in case_attrs {
        case.set_attribute(k, Timestamp::UNIX_EPOCH, v);
    }
    builder.object(case);

    let events: Vec<&Element> = others.into_iter().filter(|e| e.name == "event").collect();
    if events.is_empty() {
        builder.note(Diagnostic::about(Code::W005, &case_id, "trace holds no events"));
    }
    let mut used = false;
    for (i, ev) in events.into_iter().enumerate() {
        let path = format!("{path}/event[{}]", i + 1);
        let (attrs, _) = split_children(ev, &path)?;
        let mut fields = BTreeMap::new();
        for a in &attrs {
            match &a.value {
                XesValue::List(items) if AMBIGUITY_KEYS.contains(&a.key.as_str()) => {
                    let mut flat = BTreeMap::new();
                    flatten_into("", items, &mut flat);
                    fields.extend(flat.into_iter().map(|(k, v)| (format!("{AMBIGUITY_PREFIX}{k}"), v)));
                }
                _ => flatten_into("", std::slice::from_ref(a), &mut fields),
            }
        }
        let id = match fields.remove("identity:id") {
            Some(AttributeValue::Text(raw)) => ident(&raw, &path)?,
            Some(other) => ident(&other.to_json().to_string(), &path)?,
            None => ident(&format!("{name}/{}", i + 1), &path)?,
        };
        let time = match fields.remove("time:timestamp") {
            Some(AttributeValue::Text(raw)) => timestamp(&raw, &id, builder),
            _ => None,
        };
        let Some(time) = time else {
            builder.skip(Some(Diagnostic::about(Code::W006, &id, "event without a readable time:timestamp")));
            continue;
        };
        let mut event = match fields.remove("concept:name") {
            Some(AttributeValue::Text(label)) if !label.is_empty() => CoreEvent::iot(id, time, label),
            other => {
                if let Some(v) = other {
                    fields.insert("concept:name".into(), v);
                }
                builder.bump("reclassified_observations");
                CoreEvent::observation(id, time)
            }
        };
        event.attributes = fields;
        used = true;
        builder.event(
            event,
            vec![(source.object_id.clone(), SOURCE_QUALIFIER.into()), (case_id.clone(), CASE_QUALIFIER.into())],
        );
    }
    Ok(used)
}
