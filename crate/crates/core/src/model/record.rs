use std::collections::BTreeMap;

use super::error::ClassRuleViolation;
use super::{AttributeValue, EventClass, Identifier, ObjectClass, Timestamp};

/// event_type every observation carries.
pub const OBSERVED: &str = "observed";

/// Time-qualified attribute history: name -> (timestamp -> value).
pub type AttributeHistory = BTreeMap<String, BTreeMap<Timestamp, AttributeValue>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreObject {
    pub object_id: Identifier,
    /// Domain label such as "Tank" or "Flow sensor".
    pub object_type: String,
    pub object_class: ObjectClass,
    pub attributes: AttributeHistory,
}

impl CoreObject {
    pub fn new(object_id: Identifier, object_type: impl Into<String>, object_class: ObjectClass) -> Self {
        Self { object_id, object_type: object_type.into(), object_class, attributes: BTreeMap::new() }
    }

    /// Records `value` for `name` at `at`, replacing any value already held
    /// for that exact instant.
    pub fn set_attribute(&mut self, name: impl Into<String>, at: Timestamp, value: impl Into<AttributeValue>) {
        self.attributes.entry(name.into()).or_default().insert(at, value.into());
    }

    pub fn with_attribute(
        mut self,
        name: impl Into<String>,
        at: Timestamp,
        value: impl Into<AttributeValue>,
    ) -> Self {
        self.set_attribute(name, at, value);
        self
    }

    /// Latest value of `name` at or before `at`.
    pub fn attribute_at(&self, name: &str, at: Timestamp) -> Option<&AttributeValue> {
        self.attributes.get(name)?.range(..=at).next_back().map(|(_, v)| v)
    }

    pub fn attribute_entries(&self) -> usize {
        self.attributes.values().map(BTreeMap::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreEvent {
    pub event_id: Identifier,
    pub timestamp: Timestamp,
    pub event_class: EventClass,
    pub event_type: String,
    pub activity: Option<String>,
    pub attributes: BTreeMap<String, AttributeValue>,
}

impl CoreEvent {
    pub fn observation(event_id: Identifier, timestamp: Timestamp) -> Self {
        Self {
            event_id,
            timestamp,
            event_class: EventClass::Observation,
            event_type: OBSERVED.to_string(),
            activity: None,
            attributes: BTreeMap::new(),
        }
    }

    pub fn iot(event_id: Identifier, timestamp: Timestamp, label: impl Into<String>) -> Self {
        Self {
            event_id,
            timestamp,
            event_class: EventClass::IotEvent,
            event_type: label.into(),
            activity: None,
            attributes: BTreeMap::new(),
        }
    }

    pub fn process(event_id: Identifier, timestamp: Timestamp, activity: impl Into<String>) -> Self {
        let activity = activity.into();
        Self {
            event_id,
            timestamp,
            event_class: EventClass::ProcessEvent,
            event_type: activity.clone(),
            activity: Some(activity),
            attributes: BTreeMap::new(),
        }
    }

    pub fn with_attribute(mut self, name: impl Into<String>, value: impl Into<AttributeValue>) -> Self {
        self.attributes.insert(name.into(), value.into());
        self
    }

    /// Checks the event_type/activity rules for the event's class.
    pub fn check_class_rules(&self) -> Result<(), ClassRuleViolation> {
        let event = || self.event_id.clone();
        match self.event_class {
            EventClass::Observation => {
                if self.event_type != OBSERVED {
                    return Err(ClassRuleViolation::ObservationType {
                        event: event(),
                        found: self.event_type.clone(),
                    });
                }
            }
            EventClass::IotEvent => {
                if self.event_type.is_empty() {
                    return Err(ClassRuleViolation::EmptyEventType {
                        event: event(),
                        class: self.event_class,
                    });
                }
            }
            EventClass::ProcessEvent => match &self.activity {
                None => return Err(ClassRuleViolation::MissingActivity { event: event() }),
                Some(a) if a.is_empty() => {
                    return Err(ClassRuleViolation::MissingActivity { event: event() })
                }
                Some(a) if *a != self.event_type => {
                    return Err(ClassRuleViolation::ActivityMismatch {
                        event: event(),
                        event_type: self.event_type.clone(),
                        activity: a.clone(),
                    })
                }
                Some(_) => {}
            },
        }
        if self.event_class != EventClass::ProcessEvent && self.activity.is_some() {
            return Err(ClassRuleViolation::UnexpectedActivity {
                event: event(),
                class: self.event_class,
            });
        }
        Ok(())
    }
}

/// An event whose timestamp may be left for [`super::CoreLog::derive_event`]
/// to fill in from its sources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDraft {
    pub event_id: Identifier,
    pub timestamp: Option<Timestamp>,
    pub event_class: EventClass,
    pub event_type: String,
    pub activity: Option<String>,
    pub attributes: BTreeMap<String, AttributeValue>,
}

impl EventDraft {
    pub fn iot(event_id: Identifier, label: impl Into<String>) -> Self {
        Self::from_event(CoreEvent::iot(event_id, Timestamp::UNIX_EPOCH, label), None)
    }

    pub fn process(event_id: Identifier, activity: impl Into<String>) -> Self {
        Self::from_event(CoreEvent::process(event_id, Timestamp::UNIX_EPOCH, activity), None)
    }

    pub fn observation(event_id: Identifier) -> Self {
        Self::from_event(CoreEvent::observation(event_id, Timestamp::UNIX_EPOCH), None)
    }

    fn from_event(ev: CoreEvent, timestamp: Option<Timestamp>) -> Self {
        Self {
            event_id: ev.event_id,
            timestamp,
            event_class: ev.event_class,
            event_type: ev.event_type,
            activity: ev.activity,
            attributes: ev.attributes,
        }
    }

    pub fn at(mut self, timestamp: Timestamp) -> Self {
        self.timestamp = Some(timestamp);
        self
    }

    pub fn with_attribute(mut self, name: impl Into<String>, value: impl Into<AttributeValue>) -> Self {
        self.attributes.insert(name.into(), value.into());
        self
    }

    pub fn into_event(self, fallback: Timestamp) -> CoreEvent {
        CoreEvent {
            event_id: self.event_id,
            timestamp: self.timestamp.unwrap_or(fallback),
            event_class: self.event_class,
            event_type: self.event_type,
            activity: self.activity,
            attributes: self.attributes,
        }
    }
}

impl From<CoreEvent> for EventDraft {
    fn from(ev: CoreEvent) -> Self {
        let ts = ev.timestamp;
        Self::from_event(ev, Some(ts))
    }
}
