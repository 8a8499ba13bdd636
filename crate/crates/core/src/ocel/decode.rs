use std::collections::{BTreeMap, BTreeSet};

use super::document::{OcelDocument, OcelObject};
use super::error::DecodeError;
use super::{
    ACTIVITY_KEY, E2E_LINK_TYPE, E2E_SOURCE, E2E_TARGET, EVENT_CLASS_KEY, LINK_DIRECTION_KEY, METADATA_ID,
    OBJECT_CLASS_KEY, QUALIFIER_KEY, RESERVED_PREFIX,
};
use crate::model::{
    AttributeValue, CoreEvent, CoreLog, CoreObject, EventClass, EventEventRel, EventObjectRel, Identifier,
    LinkDirection, Namespace, ObjectClass, ObjectObjectRel,
};
use crate::validation::{Code, Diagnostic};

/// Rebuilds a log from a document.
///
/// Records without `core:` class attributes are imported as case objects
/// and process events (activity = event type), each flagged with W004.
/// Typing rules are not enforced here; run validation on the result.
pub fn from_ocel(doc: &OcelDocument) -> Result<(CoreLog, Vec<Diagnostic>), DecodeError> {
    let mut diagnostics = Vec::new();

    let mut seen = BTreeSet::new();
    for o in &doc.objects {
        if !seen.insert(&o.id) {
            return Err(DecodeError::DuplicateId { namespace: Namespace::Object, id: o.id.clone() });
        }
    }
    let mut seen = BTreeSet::new();
    for e in &doc.events {
        if !seen.insert(&e.id) {
            return Err(DecodeError::DuplicateId { namespace: Namespace::Event, id: e.id.clone() });
        }
    }

    let mut metadata = BTreeMap::new();
    let mut links: BTreeMap<&Identifier, LinkRows> = BTreeMap::new();
    let mut objects = Vec::with_capacity(doc.objects.len());
    for o in &doc.objects {
        match o.object_type.as_str() {
            METADATA_ID => {
                if o.id.as_str() != METADATA_ID {
                    return Err(invalid(o, "object_type", "metadata type on a non-metadata object"));
                }
                for a in &o.attributes {
                    metadata.insert(a.name.clone(), a.value.clone());
                }
            }
            E2E_LINK_TYPE => {
                let qualifier = match o.attribute(QUALIFIER_KEY) {
                    Some(AttributeValue::Text(q)) => q.clone(),
                    _ => return Err(invalid(o, QUALIFIER_KEY, "e2e link without text qualifier")),
                };
                if !o.relationships.is_empty() {
                    return Err(invalid(o, "relationships", "e2e link objects carry no relationships"));
                }
                links.insert(&o.id, LinkRows { qualifier, sources: Vec::new(), targets: Vec::new() });
            }
            _ => objects.push(decode_object(o, &mut diagnostics)?),
        }
    }

    let known_objects: BTreeSet<&Identifier> = objects.iter().map(|o: &CoreObject| &o.object_id).collect();
    let mut o2o = Vec::new();
    for o in doc.objects.iter().filter(|o| known_objects.contains(&o.id)) {
        for r in &o.relationships {
            if !known_objects.contains(&r.object_id) {
                return Err(DecodeError::DanglingReference { from: o.id.clone(), to: r.object_id.clone() });
            }
            o2o.push(ObjectObjectRel::new(o.id.clone(), r.object_id.clone(), r.qualifier.clone()));
        }
    }

    let mut events = Vec::with_capacity(doc.events.len());
    let mut e2o = Vec::new();
    for e in &doc.events {
        let mut class = None;
        let mut activity = None;
        let mut attributes = BTreeMap::new();
        for a in &e.attributes {
            let duplicate = match a.name.as_str() {
                EVENT_CLASS_KEY => {
                    let code = reserved_text(&a.value, &e.id, EVENT_CLASS_KEY, "events")?;
                    let parsed = code.parse::<EventClass>().map_err(|err| DecodeError::InvalidValue {
                        path: format!("events/{}/{EVENT_CLASS_KEY}", e.id),
                        message: err.to_string(),
                    })?;
                    class.replace(parsed).is_some()
                }
                ACTIVITY_KEY => activity
                    .replace(reserved_text(&a.value, &e.id, ACTIVITY_KEY, "events")?.to_string())
                    .is_some(),
                key if key.starts_with(RESERVED_PREFIX) => {
                    return Err(DecodeError::UnknownReservedKey { record: e.id.clone(), key: key.to_string() })
                }
                key => attributes.insert(key.to_string(), a.value.clone()).is_some(),
            };
            if duplicate {
                return Err(DecodeError::InvalidValue {
                    path: format!("events/{}/{}", e.id, a.name),
                    message: "attribute given twice".into(),
                });
            }
        }
        let event_class = match class {
            Some(c) => c,
            None => {
                diagnostics.push(Diagnostic::about(
                    Code::W004,
                    &e.id,
                    "event has no core:event_class; imported as process event",
                ));
                activity.get_or_insert_with(|| e.event_type.clone());
                EventClass::ProcessEvent
            }
        };

        for r in &e.relationships {
            if let Some(link) = links.get_mut(&r.object_id) {
                match r.qualifier.as_str() {
                    E2E_SOURCE => link.sources.push(e.id.clone()),
                    E2E_TARGET => link.targets.push(e.id.clone()),
                    other => {
                        return Err(DecodeError::InvalidValue {
                            path: format!("events/{}/relationships/{}", e.id, r.object_id),
                            message: format!("unexpected qualifier {other:?} towards an e2e link"),
                        })
                    }
                }
            } else if known_objects.contains(&r.object_id) {
                e2o.push(EventObjectRel::new(e.id.clone(), r.object_id.clone(), r.qualifier.clone()));
            } else {
                return Err(DecodeError::DanglingReference { from: e.id.clone(), to: r.object_id.clone() });
            }
        }

        events.push(CoreEvent {
            event_id: e.id.clone(),
            timestamp: e.time,
            event_class,
            event_type: e.event_type.clone(),
            activity,
            attributes,
        });
    }

    let mut e2e = Vec::with_capacity(links.len());
    for (id, rows) in links {
        match (rows.sources.as_slice(), rows.targets.as_slice()) {
            ([source], [target]) => e2e.push(EventEventRel::new(source.clone(), target.clone(), rows.qualifier)),
            (s, t) => {
                return Err(DecodeError::MalformedE2eLink { id: id.clone(), sources: s.len(), targets: t.len() })
            }
        }
    }

    Ok((CoreLog::from_parts(objects, events, e2o, o2o, e2e, metadata), diagnostics))
}

struct LinkRows {
    qualifier: String,
    sources: Vec<Identifier>,
    targets: Vec<Identifier>,
}

fn decode_object(o: &OcelObject, diagnostics: &mut Vec<Diagnostic>) -> Result<CoreObject, DecodeError> {
    let mut class_code = None;
    let mut direction = None;
    let mut obj = CoreObject::new(o.id.clone(), o.object_type.clone(), ObjectClass::CaseObject);
    for a in &o.attributes {
        let duplicate = match a.name.as_str() {
            OBJECT_CLASS_KEY => class_code.replace(reserved_text(&a.value, &o.id, OBJECT_CLASS_KEY, "objects")?).is_some(),
            LINK_DIRECTION_KEY => {
                let raw = reserved_text(&a.value, &o.id, LINK_DIRECTION_KEY, "objects")?;
                let parsed = raw.parse::<LinkDirection>().map_err(|e| invalid(o, LINK_DIRECTION_KEY, e))?;
                direction.replace(parsed).is_some()
            }
            key if key.starts_with(RESERVED_PREFIX) => {
                return Err(DecodeError::UnknownReservedKey { record: o.id.clone(), key: key.to_string() })
            }
            key => obj.attributes.entry(key.to_string()).or_default().insert(a.time, a.value.clone()).is_some(),
        };
        if duplicate {
            return Err(invalid(o, &a.name, "attribute given twice for the same time"));
        }
    }
    match class_code {
        Some(code) => {
            obj.object_class = ObjectClass::from_base_code(code, direction).map_err(|e| invalid(o, OBJECT_CLASS_KEY, e))?;
            if direction.is_some() && obj.object_class.link_direction().is_none() {
                return Err(invalid(o, LINK_DIRECTION_KEY, "direction on a non-link object"));
            }
        }
        None => {
            if direction.is_some() {
                return Err(invalid(o, LINK_DIRECTION_KEY, "direction without object class"));
            }
            diagnostics.push(Diagnostic::about(
                Code::W004,
                &o.id,
                "object has no core:object_class; imported as case object",
            ));
        }
    }
    Ok(obj)
}

fn reserved_text<'a>(
    value: &'a AttributeValue,
    record: &Identifier,
    key: &str,
    table: &str,
) -> Result<&'a str, DecodeError> {
    value.as_text().ok_or_else(|| DecodeError::TypeMismatch {
        path: format!("{table}/{record}/{key}"),
        expected: "string".into(),
    })
}

fn invalid(o: &OcelObject, key: &str, message: impl ToString) -> DecodeError {
    DecodeError::InvalidValue { path: format!("objects/{}/{key}", o.id), message: message.to_string() }
}
