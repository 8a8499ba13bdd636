//! Bounded-memory ingestion: records are buffered, spilled to numbered
//! segment files when a threshold is crossed, and merged back on finalize.
//!
//! The lookup table stays in memory. It holds one entry per event and object
//! id, so memory grows with the number of distinct ids, not with payloads.

mod segment;
mod session;

pub use segment::{
    decode_record, encode_record, read_segment, segment_file_name, write_segment, Segment, SegmentError,
    StreamRecord, MAGIC,
};
pub use session::{
    open_session, FinalizeError, Finalized, IngestError, Location, LookupTable, OpenError, SpillError, SpillPolicy,
    StreamSession, SEGMENT_DIR_ENV,
};
