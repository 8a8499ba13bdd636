use std::collections::{BTreeMap, BTreeSet};

use crate::model::{AttributeValue, Identifier, Timestamp};

/// In-memory OCEL 2.0 table set.
///
/// Type schemas are derived from the records by [`OcelDocument::refresh_schemas`];
/// readers and encoders always call it, so two documents with the same
/// records carry the same schemas.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OcelDocument {
    pub object_types: Vec<TypeSchema>,
    pub event_types: Vec<TypeSchema>,
    pub objects: Vec<OcelObject>,
    pub events: Vec<OcelEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TypeSchema {
    pub name: String,
    pub attributes: Vec<AttributeDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AttributeDecl {
    pub name: String,
    /// One of `string`, `integer`, `float`, `boolean`.
    pub value_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcelObject {
    pub id: Identifier,
    pub object_type: String,
    pub attributes: Vec<ObjectAttribute>,
    pub relationships: Vec<Relationship>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ObjectAttribute {
    pub name: String,
    pub time: Timestamp,
    pub value: AttributeValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcelEvent {
    pub id: Identifier,
    pub event_type: String,
    pub time: Timestamp,
    pub attributes: Vec<EventAttribute>,
    pub relationships: Vec<Relationship>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EventAttribute {
    pub name: String,
    pub value: AttributeValue,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relationship {
    pub object_id: Identifier,
    pub qualifier: String,
}

impl Relationship {
    pub fn new(object_id: Identifier, qualifier: impl Into<String>) -> Self {
        Self { object_id, qualifier: qualifier.into() }
    }
}

impl OcelObject {
    pub fn attribute(&self, name: &str) -> Option<&AttributeValue> {
        self.attributes.iter().find(|a| a.name == name).map(|a| &a.value)
    }
}

impl OcelEvent {
    pub fn attribute(&self, name: &str) -> Option<&AttributeValue> {
        self.attributes.iter().find(|a| a.name == name).map(|a| &a.value)
    }
}

impl OcelDocument {
    /// Sorts every table: objects by id, events by (time, id), attributes by
    /// name (then time), relationships by (object id, qualifier), and
    /// rebuilds the type schemas.
    pub fn canonicalize(&mut self) {
        for o in &mut self.objects {
            o.attributes.sort();
            o.relationships.sort();
            o.relationships.dedup();
        }
        for e in &mut self.events {
            e.attributes.sort();
            e.relationships.sort();
            e.relationships.dedup();
        }
        self.objects.sort_by(|a, b| a.id.cmp(&b.id));
        self.events.sort_by(|a, b| (a.time, &a.id).cmp(&(b.time, &b.id)));
        self.refresh_schemas();
    }

    pub fn into_canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    /// Rebuilds `object_types` and `event_types` from the records.
    pub fn refresh_schemas(&mut self) {
        let mut objects: BTreeMap<&str, BTreeMap<&str, TypeTally>> = BTreeMap::new();
        for o in &self.objects {
            let entry = objects.entry(&o.object_type).or_default();
            for a in &o.attributes {
                entry.entry(&a.name).or_default().add(&a.value);
            }
        }
        let mut events: BTreeMap<&str, BTreeMap<&str, TypeTally>> = BTreeMap::new();
        for e in &self.events {
            let entry = events.entry(&e.event_type).or_default();
            for a in &e.attributes {
                entry.entry(&a.name).or_default().add(&a.value);
            }
        }
        self.object_types = to_schemas(objects);
        self.event_types = to_schemas(events);
    }

    pub fn object(&self, id: &str) -> Option<&OcelObject> {
        self.objects.iter().find(|o| o.id.as_str() == id)
    }

    pub fn event(&self, id: &str) -> Option<&OcelEvent> {
        self.events.iter().find(|e| e.id.as_str() == id)
    }

    pub fn objects_of_type<'a>(&'a self, object_type: &'a str) -> impl Iterator<Item = &'a OcelObject> + 'a {
        self.objects.iter().filter(move |o| o.object_type == object_type)
    }

    /// Number of event-to-object relationship rows.
    pub fn e2o_rows(&self) -> usize {
        self.events.iter().map(|e| e.relationships.len()).sum()
    }

    pub fn o2o_rows(&self) -> usize {
        self.objects.iter().map(|o| o.relationships.len()).sum()
    }

    /// Relationship targets that name no object in the document, as
    /// (source record id, missing object id).
    pub fn dangling_relationships(&self) -> Vec<(Identifier, Identifier)> {
        let known: BTreeSet<&Identifier> = self.objects.iter().map(|o| &o.id).collect();
        let from_events = self.events.iter().map(|e| (&e.id, &e.relationships));
        let from_objects = self.objects.iter().map(|o| (&o.id, &o.relationships));
        from_events
            .chain(from_objects)
            .flat_map(|(src, rels)| rels.iter().map(move |r| (src, &r.object_id)))
            .filter(|(_, target)| !known.contains(target))
            .map(|(src, target)| (src.clone(), target.clone()))
            .collect()
    }
}

#[derive(Default)]
struct TypeTally {
    tags: BTreeSet<&'static str>,
}

impl TypeTally {
    fn add(&mut self, value: &AttributeValue) {
        if !matches!(value, AttributeValue::Null) {
            self.tags.insert(value.type_name());
        }
    }

    /// A single tag declares that type; mixed or null-only keys fall back to
    /// `string`.
    fn declared(&self) -> &'static str {
        match self.tags.len() {
            1 => self.tags.iter().next().copied().unwrap_or("string"),
            _ => "string",
        }
    }
}

fn to_schemas(by_type: BTreeMap<&str, BTreeMap<&str, TypeTally>>) -> Vec<TypeSchema> {
    by_type
        .into_iter()
        .map(|(name, attrs)| TypeSchema {
            name: name.to_string(),
            attributes: attrs
                .into_iter()
                .map(|(n, tally)| AttributeDecl { name: n.to_string(), value_type: tally.declared().to_string() })
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id;

    #[test]
    fn mixed_tags_declare_string() {
        let t = Timestamp::UNIX_EPOCH;
        let mut doc = OcelDocument {
            events: vec![
                OcelEvent {
                    id: id!("b"),
                    event_type: "observed".into(),
                    time: t,
                    attributes: vec![
                        EventAttribute { name: "value".into(), value: 206.into() },
                        EventAttribute { name: "unit".into(), value: AttributeValue::Null },
                    ],
                    relationships: vec![],
                },
                OcelEvent {
                    id: id!("a"),
                    event_type: "observed".into(),
                    time: t,
                    attributes: vec![EventAttribute { name: "value".into(), value: 206.5.into() }],
                    relationships: vec![],
                },
            ],
            ..Default::default()
        };
        doc.canonicalize();
        assert_eq!(doc.events[0].id.as_str(), "a");
        let decls = &doc.event_types[0].attributes;
        assert_eq!(decls[0], AttributeDecl { name: "unit".into(), value_type: "string".into() });
        assert_eq!(decls[1], AttributeDecl { name: "value".into(), value_type: "string".into() });
    }
}
