//! Domain types of the metamodel and the builder operations that keep a log
//! well formed.

mod class;
pub mod diff;
mod error;
mod id;
pub mod lineage;
mod log;
mod record;
mod relation;
mod time;
mod value;

pub use class::{EventClass, LinkDirection, ObjectClass};
pub use error::{
    AddEventError, ClassRuleViolation, DeriveError, DuplicateId, InvalidIdentifier, InvalidTimestamp,
    Namespace, RelError, UnknownClass,
};
pub use id::Identifier;
pub use log::{CoreLog, Insertion, OnDuplicate};
pub use record::{AttributeHistory, CoreEvent, CoreObject, EventDraft, OBSERVED};
pub use relation::{
    EventEventRel, EventObjectRel, ObjectObjectRel, DERIVED_BY, DERIVED_FROM, SELF_QUALIFIER,
};
pub use time::{ParsedTimestamp, Timestamp};
pub use value::AttributeValue;
