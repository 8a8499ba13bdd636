//! OCEL 2.0 interchange.
//!
//! Classes, activities and log metadata travel as `core:`-prefixed
//! attributes. Event-to-event relations have no OCEL counterpart: each one
//! becomes an object of type `core:e2e_link` tied to its two events by e2o
//! rows qualified `core:e2e:source` and `core:e2e:target`.

mod backend;
mod bundle;
mod decode;
mod document;
mod encode;
mod error;
pub mod json;
pub mod relational;

pub use backend::{
    load_log, round_trip, store_log, CsvBackend, JsonBackend, OcelBackend, OcelFormat, RoundTripError, StoreError,
};
pub use bundle::{BundleSink, BundleSource, DirBundle, MemoryBundle};
pub use decode::from_ocel;
pub use document::{
    AttributeDecl, EventAttribute, ObjectAttribute, OcelDocument, OcelEvent, OcelObject, Relationship, TypeSchema,
};
pub use encode::{e2e_link_id, to_ocel, to_ocel_with, EncodeMode};
pub use error::{DecodeError, EncodeError, WriteError};
pub use json::{read_json, write_json};
pub use relational::{read_relational, write_relational};

pub const RESERVED_PREFIX: &str = "core:";
pub const EVENT_CLASS_KEY: &str = "core:event_class";
pub const OBJECT_CLASS_KEY: &str = "core:object_class";
pub const LINK_DIRECTION_KEY: &str = "core:link_direction";
pub const ACTIVITY_KEY: &str = "core:activity";
pub const QUALIFIER_KEY: &str = "core:qualifier";
pub const E2E_LINK_TYPE: &str = "core:e2e_link";
pub const E2E_SOURCE: &str = "core:e2e:source";
pub const E2E_TARGET: &str = "core:e2e:target";
/// Id and type of the singleton object carrying log metadata.
pub const METADATA_ID: &str = "core:log_metadata";
