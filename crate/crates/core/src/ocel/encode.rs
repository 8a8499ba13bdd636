use std::collections::{BTreeMap, BTreeSet};

use super::document::{EventAttribute, ObjectAttribute, OcelDocument, OcelEvent, OcelObject, Relationship};
use super::error::EncodeError;
use super::{
    ACTIVITY_KEY, E2E_LINK_TYPE, E2E_SOURCE, E2E_TARGET, EVENT_CLASS_KEY, LINK_DIRECTION_KEY, METADATA_ID,
    OBJECT_CLASS_KEY, QUALIFIER_KEY, RESERVED_PREFIX,
};
use crate::model::{AttributeValue, CoreLog, EventEventRel, Identifier, Timestamp};
use crate::validation::{validate, Code};

/// How much of the validation catalog must be clean before encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncodeMode {
    /// No error diagnostics at all.
    #[default]
    Strict,
    /// Referential integrity only (no E005); typing and cardinality breaches
    /// are carried into the document unchanged.
    Lenient,
}

/// Encodes with [`EncodeMode::Strict`].
pub fn to_ocel(log: &CoreLog) -> Result<OcelDocument, EncodeError> {
    to_ocel_with(log, EncodeMode::Strict)
}

pub fn to_ocel_with(log: &CoreLog, mode: EncodeMode) -> Result<OcelDocument, EncodeError> {
    let blocking: Vec<_> = validate(log)
        .into_iter()
        .filter(|d| d.is_error() && (mode == EncodeMode::Strict || d.code == Code::E005))
        .collect();
    if !blocking.is_empty() {
        return Err(EncodeError::InvalidLog(blocking));
    }
    check_reserved(log)?;

    let link_ids = e2e_link_ids(log);
    if let Some(clash) = link_ids.values().find(|id| log.object(id.as_str()).is_some()) {
        return Err(EncodeError::ReservedIdCollision(clash.to_string()));
    }

    let mut objects = Vec::with_capacity(log.objects().len() + link_ids.len() + 1);
    for obj in log.objects().values() {
        let mut attributes = vec![ObjectAttribute {
            name: OBJECT_CLASS_KEY.into(),
            time: Timestamp::UNIX_EPOCH,
            value: obj.object_class.base_code().into(),
        }];
        if let Some(direction) = obj.object_class.link_direction() {
            attributes.push(ObjectAttribute {
                name: LINK_DIRECTION_KEY.into(),
                time: Timestamp::UNIX_EPOCH,
                value: direction.as_str().into(),
            });
        }
        for (name, history) in &obj.attributes {
            for (time, value) in history {
                attributes.push(ObjectAttribute { name: name.clone(), time: *time, value: value.clone() });
            }
        }
        let relationships = log
            .o2o_from(&obj.object_id)
            .map(|r| Relationship::new(r.target_id.clone(), r.qualifier.clone()))
            .collect();
        objects.push(OcelObject {
            id: obj.object_id.clone(),
            object_type: obj.object_type.clone(),
            attributes,
            relationships,
        });
    }

    let mut link_rows: BTreeMap<&Identifier, Vec<Relationship>> = BTreeMap::new();
    for (rel, link_id) in &link_ids {
        objects.push(OcelObject {
            id: link_id.clone(),
            object_type: E2E_LINK_TYPE.into(),
            attributes: vec![ObjectAttribute {
                name: QUALIFIER_KEY.into(),
                time: Timestamp::UNIX_EPOCH,
                value: rel.qualifier.clone().into(),
            }],
            relationships: Vec::new(),
        });
        link_rows.entry(&rel.source_event_id).or_default().push(Relationship::new(link_id.clone(), E2E_SOURCE));
        link_rows.entry(&rel.target_event_id).or_default().push(Relationship::new(link_id.clone(), E2E_TARGET));
    }

    objects.push(OcelObject {
        id: Identifier::new(METADATA_ID).expect("reserved id is valid"),
        object_type: METADATA_ID.into(),
        attributes: log
            .metadata()
            .iter()
            .map(|(name, value)| ObjectAttribute { name: name.clone(), time: Timestamp::UNIX_EPOCH, value: value.clone() })
            .collect(),
        relationships: Vec::new(),
    });

    let mut events = Vec::with_capacity(log.events().len());
    for ev in log.events().values() {
        let mut attributes = vec![EventAttribute { name: EVENT_CLASS_KEY.into(), value: ev.event_class.as_str().into() }];
        if let Some(activity) = &ev.activity {
            attributes.push(EventAttribute { name: ACTIVITY_KEY.into(), value: activity.clone().into() });
        }
        attributes.extend(ev.attributes.iter().map(|(name, value)| EventAttribute { name: name.clone(), value: value.clone() }));

        let mut relationships: Vec<Relationship> = log
            .e2o_of(&ev.event_id)
            .map(|r| {
                let qualifier = if r.qualifier.is_empty() { ev.event_type.clone() } else { r.qualifier.clone() };
                Relationship::new(r.object_id.clone(), qualifier)
            })
            .collect();
        if let Some(rows) = link_rows.remove(&ev.event_id) {
            relationships.extend(rows);
        }
        events.push(OcelEvent {
            id: ev.event_id.clone(),
            event_type: ev.event_type.clone(),
            time: ev.timestamp,
            attributes,
            relationships,
        });
    }

    Ok(OcelDocument { objects, events, ..Default::default() }.into_canonical())
}

/// Deterministic id of the object standing in for an e2e edge:
/// `e2e:<source>:<target>`, with `%` and `:` percent-escaped inside the
/// endpoints. Pairs related under several qualifiers get `:<qualifier>`
/// appended on each of their links.
pub fn e2e_link_id(source: &Identifier, target: &Identifier, qualifier: Option<&str>) -> Identifier {
    let mut raw = format!("e2e:{}:{}", escape(source.as_str()), escape(target.as_str()));
    if let Some(q) = qualifier {
        raw.push(':');
        raw.push_str(&escape(q));
    }
    Identifier::new(raw).expect("escaped endpoints are non-empty and control-free")
}

fn e2e_link_ids(log: &CoreLog) -> BTreeMap<&EventEventRel, Identifier> {
    let mut per_pair: BTreeMap<(&Identifier, &Identifier), usize> = BTreeMap::new();
    for rel in log.e2e() {
        *per_pair.entry((&rel.source_event_id, &rel.target_event_id)).or_default() += 1;
    }
    log.e2e()
        .iter()
        .map(|rel| {
            let shared = per_pair[&(&rel.source_event_id, &rel.target_event_id)] > 1;
            let id = e2e_link_id(&rel.source_event_id, &rel.target_event_id, shared.then_some(rel.qualifier.as_str()));
            (rel, id)
        })
        .collect()
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '%' => out.push_str("%25"),
            ':' => out.push_str("%3A"),
            c => out.push(c),
        }
    }
    out
}

fn check_reserved(log: &CoreLog) -> Result<(), EncodeError> {
    let reserved_types: BTreeSet<&str> = [E2E_LINK_TYPE, METADATA_ID].into();
    let check_key = |record: &str, key: &str, value: &AttributeValue| {
        if key.starts_with(RESERVED_PREFIX) {
            return Err(EncodeError::ReservedKeyCollision { record: record.to_string(), key: key.to_string() });
        }
        if !value.is_finite() {
            return Err(EncodeError::NonFiniteValue { record: record.to_string(), key: key.to_string() });
        }
        Ok(())
    };
    for (id, obj) in log.objects() {
        if id.as_str() == METADATA_ID || reserved_types.contains(obj.object_type.as_str()) {
            return Err(EncodeError::ReservedIdCollision(
                if id.as_str() == METADATA_ID { id.to_string() } else { obj.object_type.clone() },
            ));
        }
        for (key, history) in &obj.attributes {
            for value in history.values() {
                check_key(id.as_str(), key, value)?;
            }
        }
    }
    for (id, ev) in log.events() {
        for (key, value) in &ev.attributes {
            check_key(id.as_str(), key, value)?;
        }
    }
    for (key, value) in log.metadata() {
        check_key(METADATA_ID, key, value)?;
    }
    Ok(())
}
