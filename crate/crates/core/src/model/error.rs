use thiserror::Error;

use super::{EventClass, Identifier, LinkDirection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidIdentifier {
    #[error("identifier must not be empty")]
    Empty,
    #[error("identifier {value:?} contains control character {character:?}")]
    ControlCharacter { value: String, character: char },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidTimestamp {
    #[error("timestamp {0:?} has no UTC offset")]
    MissingOffset(String),
    #[error("cannot parse timestamp {0:?}")]
    Unparseable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown class {0:?}")]
pub struct UnknownClass(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Namespace {
    Event,
    Object,
}

impl std::fmt::Display for Namespace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Namespace::Event => "event",
            Namespace::Object => "object",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("duplicate {namespace} id {id}")]
pub struct DuplicateId {
    pub namespace: Namespace,
    pub id: Identifier,
}

/// Breach of the event-class or link-direction typing rules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassRuleViolation {
    #[error("observation {event} has event_type {found:?}, expected \"observed\"")]
    ObservationType { event: Identifier, found: String },
    #[error("process event {event} has no activity")]
    MissingActivity { event: Identifier },
    #[error("process event {event} has event_type {event_type:?} but activity {activity:?}")]
    ActivityMismatch { event: Identifier, event_type: String, activity: String },
    #[error("{class} event {event} has an empty event_type")]
    EmptyEventType { event: Identifier, class: EventClass },
    #[error("{class} event {event} must not carry an activity")]
    UnexpectedActivity { event: Identifier, class: EventClass },
    #[error("object {object} is not a link")]
    NotALink { object: Identifier },
    #[error("{direction:?} link cannot derive a {target} from {source_class} event {source_event}")]
    IncompatibleDirection {
        direction: LinkDirection,
        target: EventClass,
        source_event: Identifier,
        source_class: EventClass,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AddEventError {
    #[error(transparent)]
    DuplicateId(#[from] DuplicateId),
    #[error("event references unknown object {0}")]
    DanglingObjectRef(Identifier),
    #[error(transparent)]
    ClassRuleViolation(#[from] ClassRuleViolation),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelError {
    #[error("relation references unknown object {0}")]
    DanglingObjectRef(Identifier),
    #[error("relation references unknown event {0}")]
    DanglingEventRef(Identifier),
    #[error("self relation on {0} requires the qualifier \"self\"")]
    SelfRelation(Identifier),
    #[error("edge {source_event} -> {target} would close a cycle")]
    CycleDetected { source_event: Identifier, target: Identifier },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("derivation needs at least one source event")]
    NoSources,
    #[error("derivation references unknown event {0}")]
    DanglingEventRef(Identifier),
    #[error("derivation references unknown object {0}")]
    DanglingObjectRef(Identifier),
    #[error(transparent)]
    DuplicateId(#[from] DuplicateId),
    #[error(transparent)]
    ClassRuleViolation(#[from] ClassRuleViolation),
    #[error("derived edge would close a cycle at {0}")]
    CycleDetected(Identifier),
}
