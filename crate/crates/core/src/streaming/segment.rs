//! Segment files: `CORESEG1`, then per record a 4-byte little-endian length
//! and that many bytes of JSON, then the end marker `0xFFFF_FFFF` followed by
//! the record count as a little-endian u64.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    AttributeValue, CoreEvent, CoreObject, EventClass, EventEventRel, EventObjectRel, Identifier, ObjectClass,
    ObjectObjectRel, Timestamp,
};

pub const MAGIC: &[u8; 8] = b"CORESEG1";
const END_MARKER: u32 = u32::MAX;

/// One unit of stream input.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamRecord {
    Object(CoreObject),
    /// An event with its e2o links, as for [`crate::model::CoreLog::add_event`].
    Event { event: CoreEvent, links: Vec<(Identifier, String)> },
    E2o(EventObjectRel),
    O2o(ObjectObjectRel),
    E2e(EventEventRel),
}

impl StreamRecord {
    pub fn event(event: CoreEvent, links: Vec<(Identifier, String)>) -> Self {
        StreamRecord::Event { event, links }
    }

    pub fn timestamp(&self) -> Option<Timestamp> {
        match self {
            StreamRecord::Event { event, .. } => Some(event.timestamp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub sequence_number: u64,
    pub record_count: u64,
    pub min_timestamp: Option<Timestamp>,
    pub max_timestamp: Option<Timestamp>,
    pub path: PathBuf,
}

pub fn segment_file_name(sequence_number: u64) -> String {
    format!("segment-{sequence_number}.coreseg")
}

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("{path}: not a segment file (bad magic)")]
    BadMagic { path: PathBuf },
    #[error("{path}: torn after {records_read} complete records at byte {offset}")]
    Torn { path: PathBuf, records_read: u64, offset: u64 },
    #[error("{path}: trailer says {trailer} records, found {found}")]
    CountMismatch { path: PathBuf, trailer: u64, found: u64 },
    #[error("{path}: record {index}: {message}")]
    MalformedRecord { path: PathBuf, index: u64, message: String },
    #[error("{path}: trailing bytes after the trailer")]
    TrailingBytes { path: PathBuf },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Serialize, Deserialize)]
struct WireAttr {
    name: String,
    value: Value,
}

#[derive(Serialize, Deserialize)]
struct WireTimedAttr {
    name: String,
    time: String,
    value: Value,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct WireLink {
    object_id: String,
    qualifier: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case", deny_unknown_fields)]
enum Wire {
    Object {
        id: String,
        #[serde(rename = "type")]
        object_type: String,
        class: String,
        attributes: Vec<WireTimedAttr>,
    },
    Event {
        id: String,
        #[serde(rename = "type")]
        event_type: String,
        time: String,
        class: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        activity: Option<String>,
        attributes: Vec<WireAttr>,
        relationships: Vec<WireLink>,
    },
    E2o {
        event: String,
        object: String,
        qualifier: String,
    },
    O2o {
        source: String,
        target: String,
        qualifier: String,
    },
    E2e {
        source: String,
        target: String,
        qualifier: String,
    },
}

fn to_wire(record: &StreamRecord) -> Wire {
    match record {
        StreamRecord::Object(o) => Wire::Object {
            id: o.object_id.to_string(),
            object_type: o.object_type.clone(),
            class: o.object_class.to_string(),
            attributes: o
                .attributes
                .iter()
                .flat_map(|(name, history)| {
                    history.iter().map(move |(t, v)| WireTimedAttr {
                        name: name.clone(),
                        time: t.to_canonical_string(),
                        value: v.to_json(),
                    })
                })
                .collect(),
        },
        StreamRecord::Event { event, links } => Wire::Event {
            id: event.event_id.to_string(),
            event_type: event.event_type.clone(),
            time: event.timestamp.to_canonical_string(),
            class: event.event_class.to_string(),
            activity: event.activity.clone(),
            attributes: event
                .attributes
                .iter()
                .map(|(name, v)| WireAttr { name: name.clone(), value: v.to_json() })
                .collect(),
            relationships: links
                .iter()
                .map(|(o, q)| WireLink { object_id: o.to_string(), qualifier: q.clone() })
                .collect(),
        },
        StreamRecord::E2o(r) => Wire::E2o {
            event: r.event_id.to_string(),
            object: r.object_id.to_string(),
            qualifier: r.qualifier.clone(),
        },
        StreamRecord::O2o(r) => Wire::O2o {
            source: r.source_id.to_string(),
            target: r.target_id.to_string(),
            qualifier: r.qualifier.clone(),
        },
        StreamRecord::E2e(r) => Wire::E2e {
            source: r.source_event_id.to_string(),
            target: r.target_event_id.to_string(),
            qualifier: r.qualifier.clone(),
        },
    }
}

fn from_wire(wire: Wire) -> Result<StreamRecord, String> {
    let id = |s: String| Identifier::new(s).map_err(|e| e.to_string());
    let time = |s: &str| Timestamp::parse(s).map_err(|e| e.to_string());
    let value = |v: &Value| {
        AttributeValue::from_json(v).ok_or_else(|| format!("unsupported attribute value {v}"))
    };
    Ok(match wire {
        Wire::Object { id: oid, object_type, class, attributes } => {
            let class: ObjectClass = class.parse().map_err(|e: crate::model::UnknownClass| e.to_string())?;
            let mut obj = CoreObject::new(id(oid)?, object_type, class);
            for a in attributes {
                obj.set_attribute(a.name, time(&a.time)?, value(&a.value)?);
            }
            StreamRecord::Object(obj)
        }
        Wire::Event { id: eid, event_type, time: t, class, activity, attributes, relationships } => {
            let event_class: EventClass = class.parse().map_err(|e: crate::model::UnknownClass| e.to_string())?;
            let mut event = CoreEvent::observation(id(eid)?, time(&t)?);
            event.event_class = event_class;
            event.event_type = event_type;
            event.activity = activity;
            for a in attributes {
                event.attributes.insert(a.name, value(&a.value)?);
            }
            let links = relationships
                .into_iter()
                .map(|l| Ok((id(l.object_id)?, l.qualifier)))
                .collect::<Result<_, String>>()?;
            StreamRecord::Event { event, links }
        }
        Wire::E2o { event, object, qualifier } => StreamRecord::E2o(EventObjectRel::new(id(event)?, id(object)?, qualifier)),
        Wire::O2o { source, target, qualifier } => {
            StreamRecord::O2o(ObjectObjectRel::new(id(source)?, id(target)?, qualifier))
        }
        Wire::E2e { source, target, qualifier } => {
            StreamRecord::E2e(EventEventRel::new(id(source)?, id(target)?, qualifier))
        }
    })
}

pub fn encode_record(record: &StreamRecord) -> Vec<u8> {
    serde_json::to_vec(&to_wire(record)).expect("wire records always serialize")
}

pub fn decode_record(bytes: &[u8]) -> Result<StreamRecord, String> {
    let wire: Wire = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    from_wire(wire)
}

/// Writes `records` as segment `sequence_number` under `dir`. The file
/// appears under its final name only once complete.
pub fn write_segment(dir: &Path, sequence_number: u64, records: &[StreamRecord]) -> Result<Segment, SegmentError> {
    let path = dir.join(segment_file_name(sequence_number));
    let partial = dir.join(format!("{}.partial", segment_file_name(sequence_number)));
    let io_err = |source| SegmentError::Io { path: path.clone(), source };
    let write = || -> io::Result<()> {
        let mut out = BufWriter::new(File::create(&partial)?);
        out.write_all(MAGIC)?;
        for record in records {
            let bytes = encode_record(record);
            let len = u32::try_from(bytes.len())
                .ok()
                .filter(|&n| n != END_MARKER)
                .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "record too large"))?;
            out.write_all(&len.to_le_bytes())?;
            out.write_all(&bytes)?;
        }
        out.write_all(&END_MARKER.to_le_bytes())?;
        out.write_all(&(records.len() as u64).to_le_bytes())?;
        out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&partial, &path)
    };
    if let Err(e) = write() {
        let _ = fs::remove_file(&partial);
        return Err(io_err(e));
    }
    let times = records.iter().filter_map(StreamRecord::timestamp);
    Ok(Segment {
        sequence_number,
        record_count: records.len() as u64,
        min_timestamp: times.clone().min(),
        max_timestamp: times.max(),
        path,
    })
}

/// Reads a whole segment file. A file cut short anywhere, including inside
/// the trailer, is reported as [`SegmentError::Torn`].
pub fn read_segment(path: &Path) -> Result<Vec<StreamRecord>, SegmentError> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| SegmentError::Io { path: path.to_path_buf(), source })?;
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(SegmentError::BadMagic { path: path.to_path_buf() });
    }
    let mut records = Vec::new();
    let mut pos = MAGIC.len();
    let torn = |records_read: usize, offset: usize| SegmentError::Torn {
        path: path.to_path_buf(),
        records_read: records_read as u64,
        offset: offset as u64,
    };
    loop {
        let Some(prefix) = bytes.get(pos..pos + 4) else { return Err(torn(records.len(), pos)) };
        let len = u32::from_le_bytes(prefix.try_into().expect("4 bytes"));
        if len == END_MARKER {
            let Some(count) = bytes.get(pos + 4..pos + 12) else { return Err(torn(records.len(), pos)) };
            let trailer = u64::from_le_bytes(count.try_into().expect("8 bytes"));
            if pos + 12 != bytes.len() {
                return Err(SegmentError::TrailingBytes { path: path.to_path_buf() });
            }
            if trailer != records.len() as u64 {
                return Err(SegmentError::CountMismatch {
                    path: path.to_path_buf(),
                    trailer,
                    found: records.len() as u64,
                });
            }
            return Ok(records);
        }
        let start = pos + 4;
        let Some(body) = bytes.get(start..start + len as usize) else { return Err(torn(records.len(), pos)) };
        let record = decode_record(body).map_err(|message| SegmentError::MalformedRecord {
            path: path.to_path_buf(),
            index: records.len() as u64,
            message,
        })?;
        records.push(record);
        pos = start + len as usize;
    }
}
