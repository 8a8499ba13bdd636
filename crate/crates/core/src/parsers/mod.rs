//! Translation of legacy IoT-enhanced log formats into [`CoreLog`].
//!
//! Every parser is lenient: defects in the source (duplicate ids, dangling
//! references, class-rule breaches) drop the offending record or relation
//! and leave a diagnostic in the [`ParseReport`]. Only unreadable input is an
//! error.

mod cairo;
mod custom;
mod datastream;
mod nice;
pub mod xml;
mod xes;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{
    AttributeValue, ClassRuleViolation, CoreEvent, CoreLog, CoreObject, EventEventRel, Identifier, Insertion, ObjectClass,
    ObjectObjectRel, OnDuplicate, RelError, Timestamp,
};
use crate::validation::{self, Code, Diagnostic};

pub use custom::{parse_custom, ClassRule, MappingConfig};
pub use datastream::{parse_datastream, DataStreamProfile};
pub use nice::parse_nice;
pub use cairo::parse_cairo;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("input is not valid UTF-8 (valid up to byte {valid_up_to})")]
    NotUtf8 { valid_up_to: usize },
    #[error("malformed XML at byte {position}: {message}")]
    MalformedXml { position: u64, message: String },
    #[error("document does not declare the stream: extension")]
    MissingExtension,
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("malformed input at {location}: {message}")]
    MalformedInput { location: String, message: String },
    #[error("mapping rule {rule}: {message}")]
    MappingError { rule: String, message: String },
}

impl ParseError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError::SchemaViolation { path: path.into(), message: message.into() }
    }
}

/// Input dialect selector.
#[derive(Debug, Clone, PartialEq)]
pub enum ParserProfile {
    DataStreamTrier,
    DataStreamTum,
    Nice,
    Cairo,
    Custom(MappingConfig),
}

impl ParserProfile {
    pub fn name(&self) -> &'static str {
        match self {
            ParserProfile::DataStreamTrier => "datastream-trier",
            ParserProfile::DataStreamTum => "datastream-tum",
            ParserProfile::Nice => "nice",
            ParserProfile::Cairo => "cairo",
            ParserProfile::Custom(_) => "custom",
        }
    }
}

/// Parses `bytes` with the dialect named by `profile`.
pub fn parse(bytes: &[u8], profile: &ParserProfile) -> Result<ParseReport, ParseError> {
    match profile {
        ParserProfile::DataStreamTrier => parse_datastream(bytes, DataStreamProfile::Trier),
        ParserProfile::DataStreamTum => parse_datastream(bytes, DataStreamProfile::Tum),
        ParserProfile::Nice => parse_nice(bytes),
        ParserProfile::Cairo => parse_cairo(bytes),
        ParserProfile::Custom(mapping) => parse_custom(bytes, mapping),
    }
}

/// Names accepted by [`ParserProfile::from_str`]; `custom` needs a mapping
/// and is therefore not parseable from a name alone.
impl FromStr for ParserProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "datastream-trier" => Ok(ParserProfile::DataStreamTrier),
            "datastream-tum" => Ok(ParserProfile::DataStreamTum),
            "nice" => Ok(ParserProfile::Nice),
            "cairo" => Ok(ParserProfile::Cairo),
            other => Err(format!("unknown parser profile {other:?}")),
        }
    }
}

impl fmt::Display for ParserProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub mod count {
    pub const SOURCE_EVENTS: &str = "source_events";
    pub const PARSED_EVENTS: &str = "parsed_events";
    pub const SKIPPED_EVENTS: &str = "skipped_events";
    pub const OBJECTS: &str = "objects";
    pub const E2O: &str = "e2o";
    pub const O2O: &str = "o2o";
    pub const E2E: &str = "e2e";
    pub const DROPPED_RELATIONS: &str = "dropped_relations";
    pub const SKIPPED_OBJECTS: &str = "skipped_objects";
    pub const ATTRIBUTE_UPDATES: &str = "attribute_updates";
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseReport {
    pub log: CoreLog,
    /// Parse-time findings merged with [`validation::validate`] on the result,
    /// sorted and deduplicated.
    pub diagnostics: Vec<Diagnostic>,
    pub counts: BTreeMap<String, usize>,
}

impl ParseReport {
    pub fn count(&self, key: &str) -> usize {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }

    pub fn diagnostics_with(&self, code: Code) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(move |d| d.code == code)
    }
}

pub(crate) fn ident(raw: &str, path: &str) -> Result<Identifier, ParseError> {
    Identifier::new(raw).map_err(|e| ParseError::schema(path, e.to_string()))
}

/// The information-system object standing in for whatever produced a
/// document: `ds:` plus the first 12 hex digits of the document's SHA-256.
pub fn synthesized_source(bytes: &[u8], profile: &str) -> CoreObject {
    let digest = hex::encode(Sha256::digest(bytes));
    let id = Identifier::new(format!("ds:{}", &digest[..12])).expect("non-empty");
    CoreObject::new(id, "Information system", ObjectClass::InformationSystem)
        .with_attribute("profile", Timestamp::UNIX_EPOCH, profile)
}

pub(crate) const SOURCE_QUALIFIER: &str = "source-system";
pub(crate) const CASE_QUALIFIER: &str = "case";

struct PendingEvent {
    event: CoreEvent,
    links: Vec<(Identifier, String)>,
}

struct PendingUpdate {
    record: Identifier,
    object: Identifier,
    name: String,
    at: Timestamp,
    value: AttributeValue,
}

/// Collects records in source order and assembles the log at the end, so
/// forward references resolve regardless of document order.
pub(crate) struct Builder {
    metadata: BTreeMap<String, AttributeValue>,
    objects: Vec<CoreObject>,
    object_ids: BTreeSet<Identifier>,
    events: Vec<PendingEvent>,
    o2o: Vec<ObjectObjectRel>,
    e2e: Vec<EventEventRel>,
    updates: Vec<PendingUpdate>,
    diagnostics: Vec<Diagnostic>,
    source_events: usize,
    skipped_events: usize,
    extra: BTreeMap<String, usize>,
}

impl Builder {
    pub fn new() -> Self {
        Self {
            metadata: BTreeMap::new(),
            objects: Vec::new(),
            object_ids: BTreeSet::new(),
            events: Vec::new(),
            o2o: Vec::new(),
            e2e: Vec::new(),
            updates: Vec::new(),
            diagnostics: Vec::new(),
            source_events: 0,
            skipped_events: 0,
            extra: BTreeMap::new(),
        }
    }

    pub fn metadata(&mut self, key: impl Into<String>, value: AttributeValue) {
        self.metadata.insert(key.into(), value);
    }

    pub fn note(&mut self, diagnostic: Diagnostic) {
        self.diagnostics.push(diagnostic);
    }

    pub fn bump(&mut self, key: &str) {
        *self.extra.entry(key.to_string()).or_default() += 1;
    }

    pub fn object(&mut self, obj: CoreObject) {
        self.object_ids.insert(obj.object_id.clone());
        self.objects.push(obj);
    }

    pub fn has_object(&self, id: &str) -> bool {
        self.object_ids.contains(id)
    }

    /// Adds `obj` unless an object with its id was already queued.
    pub fn object_once(&mut self, obj: CoreObject) {
        if !self.has_object(obj.object_id.as_str()) {
            self.object(obj);
        }
    }

    pub fn event(&mut self, event: CoreEvent, links: Vec<(Identifier, String)>) {
        self.source_events += 1;
        self.events.push(PendingEvent { event, links });
    }

    /// A source record that yields no event.
    pub fn skip(&mut self, diagnostic: Option<Diagnostic>) {
        self.source_events += 1;
        self.skipped_events += 1;
        self.diagnostics.extend(diagnostic);
    }

    /// A source record that becomes an object attribute update instead of an
    /// event; counted as skipped.
    pub fn update(&mut self, record: Identifier, object: Identifier, name: String, at: Timestamp, value: AttributeValue) {
        self.source_events += 1;
        self.skipped_events += 1;
        self.updates.push(PendingUpdate { record, object, name, at, value });
    }

    pub fn o2o(&mut self, rel: ObjectObjectRel) {
        self.o2o.push(rel);
    }

    pub fn e2e(&mut self, rel: EventEventRel) {
        self.e2e.push(rel);
    }

    pub fn finish(mut self) -> ParseReport {
        let mut log = CoreLog::new(std::mem::take(&mut self.metadata));
        let mut dropped = 0usize;
        let mut skipped_objects = 0usize;

        for obj in std::mem::take(&mut self.objects) {
            let id = obj.object_id.clone();
            if matches!(log.insert_object(obj, OnDuplicate::Skip), Ok(Insertion::Skipped(_))) {
                skipped_objects += 1;
                self.diagnostics.push(Diagnostic::about(Code::W003, &id, "duplicate object id, later record skipped"));
            }
        }

        let mut applied = 0usize;
        for u in std::mem::take(&mut self.updates) {
            match log.object_mut(u.object.as_str()) {
                Some(obj) => {
                    obj.set_attribute(u.name, u.at, u.value);
                    applied += 1;
                }
                None => self.diagnostics.push(Diagnostic::about(
                    Code::W006,
                    &u.record,
                    format!("context record dropped, object {} unknown", u.object),
                )),
            }
        }

        for PendingEvent { event, links } in std::mem::take(&mut self.events) {
            let id = event.event_id.clone();
            if log.event(id.as_str()).is_some() {
                self.skipped_events += 1;
                self.diagnostics.push(Diagnostic::about(Code::W003, &id, "duplicate event id, later record skipped"));
                continue;
            }
            if let Err(violation) = event.check_class_rules() {
                self.skipped_events += 1;
                let code = match violation {
                    ClassRuleViolation::ObservationType { .. } => Code::E006,
                    _ => Code::E007,
                };
                self.diagnostics.push(Diagnostic::about(code, &id, format!("record skipped: {violation}")));
                continue;
            }
            let mut kept = Vec::with_capacity(links.len());
            for (object, qualifier) in links {
                if log.object(object.as_str()).is_some() {
                    kept.push((object, qualifier));
                } else {
                    dropped += 1;
                    self.diagnostics.push(Diagnostic::about(
                        Code::E005,
                        &id,
                        format!("reference to unknown object {object} dropped"),
                    ));
                }
            }
            log.add_event(event, &kept).expect("checked above");
        }

        for rel in std::mem::take(&mut self.o2o) {
            let subject = rel.source_id.clone();
            if let Err(e) = log.add_o2o(rel) {
                dropped += 1;
                let code = match e {
                    RelError::SelfRelation(_) => Code::W006,
                    _ => Code::E005,
                };
                self.diagnostics.push(Diagnostic::about(code, &subject, format!("relation dropped: {e}")));
            }
        }

        for rel in std::mem::take(&mut self.e2e) {
            let subject = rel.target_event_id.clone();
            if let Err(e) = log.add_e2e(rel) {
                dropped += 1;
                let code = match e {
                    RelError::CycleDetected { .. } => Code::E008,
                    _ => Code::E005,
                };
                self.diagnostics.push(Diagnostic::about(code, &subject, format!("relation dropped: {e}")));
            }
        }

        let mut diagnostics = self.diagnostics;
        diagnostics.extend(validation::validate(&log));
        validation::normalize(&mut diagnostics);

        let mut counts = self.extra;
        counts.insert(count::SOURCE_EVENTS.into(), self.source_events);
        counts.insert(count::PARSED_EVENTS.into(), log.events().len());
        counts.insert(count::SKIPPED_EVENTS.into(), self.skipped_events);
        counts.insert(count::OBJECTS.into(), log.objects().len());
        counts.insert(count::SKIPPED_OBJECTS.into(), skipped_objects);
        counts.insert(count::E2O.into(), log.e2o().len());
        counts.insert(count::O2O.into(), log.o2o().len());
        counts.insert(count::E2E.into(), log.e2e().len());
        counts.insert(count::DROPPED_RELATIONS.into(), dropped);
        counts.insert(count::ATTRIBUTE_UPDATES.into(), applied);
        debug_assert_eq!(self.source_events, log.events().len() + self.skipped_events);

        ParseReport { log, diagnostics, counts }
    }
}
