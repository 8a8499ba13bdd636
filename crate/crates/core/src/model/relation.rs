use super::Identifier;

/// Event-to-object relation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventObjectRel {
    pub event_id: Identifier,
    pub object_id: Identifier,
    pub qualifier: String,
}

/// Object-to-object relation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectObjectRel {
    pub source_id: Identifier,
    pub target_id: Identifier,
    pub qualifier: String,
}

/// Event-to-event relation, lower-level source to higher-level target.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventEventRel {
    pub source_event_id: Identifier,
    pub target_event_id: Identifier,
    pub qualifier: String,
}

/// Qualifier that permits an o2o relation from an object to itself.
pub const SELF_QUALIFIER: &str = "self";

/// Qualifier of the e2e edges written by derivations.
pub const DERIVED_FROM: &str = "derived-from";

/// Qualifier of the e2o edge from a derived event to its link.
pub const DERIVED_BY: &str = "derived-by";

impl EventObjectRel {
    pub fn new(event_id: Identifier, object_id: Identifier, qualifier: impl Into<String>) -> Self {
        Self { event_id, object_id, qualifier: qualifier.into() }
    }

    pub(crate) fn lower_bound(event_id: &Identifier) -> Self {
        Self::new(event_id.clone(), Identifier::min_bound(), String::new())
    }
}

impl ObjectObjectRel {
    pub fn new(source_id: Identifier, target_id: Identifier, qualifier: impl Into<String>) -> Self {
        Self { source_id, target_id, qualifier: qualifier.into() }
    }

    pub(crate) fn lower_bound(source_id: &Identifier) -> Self {
        Self::new(source_id.clone(), Identifier::min_bound(), String::new())
    }
}

impl EventEventRel {
    pub fn new(
        source_event_id: Identifier,
        target_event_id: Identifier,
        qualifier: impl Into<String>,
    ) -> Self {
        Self { source_event_id, target_event_id, qualifier: qualifier.into() }
    }

    pub(crate) fn lower_bound(source_event_id: &Identifier) -> Self {
        Self::new(source_event_id.clone(), Identifier::min_bound(), String::new())
    }
}
