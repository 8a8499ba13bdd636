use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::segment::{read_segment, segment_file_name, write_segment, Segment, SegmentError, StreamRecord};
use crate::model::{
    CoreLog, CoreObject, DuplicateId, EventObjectRel, Identifier, Namespace, ObjectClass, RelError, Timestamp,
    SELF_QUALIFIER,
};
use crate::validation::{normalize, Code, Diagnostic};

/// Overrides the segment directory for commands that stream from files.
pub const SEGMENT_DIR_ENV: &str = "CORELOG_SEGMENT_DIR";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpillPolicy {
    pub max_buffered_records: Option<NonZeroUsize>,
    pub max_buffer_age: Option<Duration>,
    pub segment_directory: PathBuf,
}

impl SpillPolicy {
    /// A count of 0 leaves the count trigger unset.
    pub fn by_count(max_buffered_records: usize, segment_directory: impl Into<PathBuf>) -> Self {
        Self {
            max_buffered_records: NonZeroUsize::new(max_buffered_records),
            max_buffer_age: None,
            segment_directory: segment_directory.into(),
        }
    }

    pub fn by_age(max_buffer_age: Duration, segment_directory: impl Into<PathBuf>) -> Self {
        Self { max_buffered_records: None, max_buffer_age: Some(max_buffer_age), segment_directory: segment_directory.into() }
    }

    /// `$CORELOG_SEGMENT_DIR` if set, else `fallback`.
    pub fn directory_from_env(fallback: impl Into<PathBuf>) -> PathBuf {
        std::env::var_os(SEGMENT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| fallback.into())
    }
}

#[derive(Debug, Error)]
pub enum OpenError {
    #[error("spill policy sets neither a record count nor a buffer age")]
    NoTrigger,
    #[error("segment directory {path} is not writable: {source}")]
    NotWritable { path: PathBuf, source: io::Error },
    #[error("segment directory already holds {path}")]
    ExistingSegment { path: PathBuf },
    #[error("unknown data-source kind {0:?} (expected sensor or information_system)")]
    UnknownKind(String),
    #[error("data-source descriptor names an invalid id: {0}")]
    InvalidId(String),
}

#[derive(Debug, Error)]
pub enum SpillError {
    #[error("nothing to spill: buffer is empty")]
    EmptyBuffer,
    #[error(transparent)]
    Write(#[from] SegmentError),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    DuplicateId(#[from] DuplicateId),
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    /// The record was buffered but the triggered spill failed; the buffer
    /// is intact and a later spill may be retried.
    #[error("record buffered but spill failed: {0}")]
    Spill(#[from] SpillError),
}

#[derive(Debug, Error)]
pub enum FinalizeError {
    #[error("final spill failed: {0}")]
    Spill(#[from] SpillError),
    #[error("segment {sequence_number} ({path}) is unreadable: {source}")]
    UnreadableSegment { sequence_number: u64, path: PathBuf, source: SegmentError },
}

/// Where a record with a given id lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Buffered,
    Spilled { sequence_number: u64, offset: u64 },
    /// The data-source object synthesized at open.
    SessionSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    Event,
    Object,
}

impl From<Namespace> for Side {
    fn from(ns: Namespace) -> Self {
        match ns {
            Namespace::Event => Side::Event,
            Namespace::Object => Side::Object,
        }
    }
}

/// Spilled ids and relations still waiting for an endpoint.
#[derive(Debug, Default)]
pub struct LookupTable {
    spilled: BTreeMap<(Side, Identifier), (u64, u64)>,
    source: Option<Identifier>,
    pending: Vec<Option<StreamRecord>>,
    waiting: BTreeMap<(Side, Identifier), Vec<usize>>,
    pending_len: usize,
}

impl LookupTable {
    pub fn spilled(&self, namespace: Namespace, id: &Identifier) -> Option<(u64, u64)> {
        self.spilled.get(&(namespace.into(), id.clone())).copied()
    }

    pub fn spilled_len(&self) -> usize {
        self.spilled.len()
    }

    pub fn pending_len(&self) -> usize {
        self.pending_len
    }

    pub fn pending(&self) -> impl Iterator<Item = &StreamRecord> {
        self.pending.iter().flatten()
    }

    fn park(&mut self, record: StreamRecord, missing: Vec<(Side, Identifier)>) {
        let slot = self.pending.len();
        self.pending.push(Some(record));
        self.pending_len += 1;
        for key in missing {
            self.waiting.entry(key).or_default().push(slot);
        }
    }

    fn take_waiting(&mut self, key: &(Side, Identifier)) -> Vec<usize> {
        self.waiting.remove(key).unwrap_or_default()
    }
}

/// Result of [`StreamSession::finalize`].
#[derive(Debug)]
pub struct Finalized {
    pub log: CoreLog,
    /// E005 for relations whose endpoints never arrived, E008 for e2e edges
    /// that would close a cycle.
    pub diagnostics: Vec<Diagnostic>,
    pub segments: Vec<Segment>,
    pub lookup: LookupTable,
}

impl Finalized {
    pub fn locate(&self, namespace: Namespace, id: &Identifier) -> Option<Location> {
        if namespace == Namespace::Object && self.lookup.source.as_ref() == Some(id) {
            return Some(Location::SessionSource);
        }
        self.lookup
            .spilled(namespace, id)
            .map(|(sequence_number, offset)| Location::Spilled { sequence_number, offset })
    }
}

pub struct StreamSession {
    policy: SpillPolicy,
    buffer: Vec<StreamRecord>,
    buffered: BTreeSet<(Side, Identifier)>,
    buffer_started: Option<Instant>,
    segments: Vec<Segment>,
    lookup: LookupTable,
    source: CoreObject,
    clock: Box<dyn Fn() -> Instant + Send>,
}

impl std::fmt::Debug for StreamSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StreamSession")
            .field("policy", &self.policy)
            .field("buffered", &self.buffer.len())
            .field("segments", &self.segments.len())
            .field("source", &self.source.object_id)
            .finish()
    }
}

/// Builds the session's data source from its descriptor.
///
/// `kind` picks the class (`sensor`, or `information_system` by default);
/// `id`, else `name`, gives the id, else a hash of the descriptor does;
/// `type` overrides the object type. Every other entry becomes an attribute.
fn descriptor_source(descriptor: &BTreeMap<String, String>) -> Result<CoreObject, OpenError> {
    let (class, default_type) = match descriptor.get("kind").map(String::as_str) {
        Some("sensor") => (ObjectClass::Sensor, "Sensor"),
        None | Some("information_system" | "information-system") => {
            (ObjectClass::InformationSystem, "Information system")
        }
        Some(other) => return Err(OpenError::UnknownKind(other.to_string())),
    };
    let raw = match descriptor.get("id").or_else(|| descriptor.get("name")) {
        Some(name) => name.clone(),
        None => {
            let canonical = serde_json::to_vec(descriptor).expect("string map serializes");
            format!("ds:{}", &hex::encode(Sha256::digest(canonical))[..12])
        }
    };
    let id = Identifier::new(raw).map_err(|e| OpenError::InvalidId(e.to_string()))?;
    let object_type = descriptor.get("type").map(String::as_str).unwrap_or(default_type);
    let mut source = CoreObject::new(id, object_type, class);
    for (k, v) in descriptor {
        if !matches!(k.as_str(), "kind" | "id" | "type") {
            source.set_attribute(k.clone(), Timestamp::UNIX_EPOCH, v.as_str());
        }
    }
    Ok(source)
}

fn check_writable(dir: &Path) -> Result<(), OpenError> {
    let not_writable = |source| OpenError::NotWritable { path: dir.to_path_buf(), source };
    fs::create_dir_all(dir).map_err(not_writable)?;
    let probe = dir.join(".corelog-probe");
    OpenOptions::new().write(true).create(true).truncate(true).open(&probe).map_err(not_writable)?;
    fs::remove_file(&probe).map_err(not_writable)?;
    let first = dir.join(segment_file_name(0));
    if first.exists() {
        return Err(OpenError::ExistingSegment { path: first });
    }
    Ok(())
}

pub fn open_session(policy: SpillPolicy, source_descriptor: &BTreeMap<String, String>) -> Result<StreamSession, OpenError> {
    if policy.max_buffered_records.is_none() && policy.max_buffer_age.is_none() {
        return Err(OpenError::NoTrigger);
    }
    let source = descriptor_source(source_descriptor)?;
    check_writable(&policy.segment_directory)?;
    let lookup = LookupTable { source: Some(source.object_id.clone()), ..LookupTable::default() };
    Ok(StreamSession {
        policy,
        buffer: Vec::new(),
        buffered: BTreeSet::new(),
        buffer_started: None,
        segments: Vec::new(),
        lookup,
        source,
        clock: Box::new(Instant::now),
    })
}

/// Ids a record introduces.
fn introduces(record: &StreamRecord) -> Option<(Side, &Identifier)> {
    match record {
        StreamRecord::Object(o) => Some((Side::Object, &o.object_id)),
        StreamRecord::Event { event, .. } => Some((Side::Event, &event.event_id)),
        _ => None,
    }
}

/// Ids a relation record depends on.
fn endpoints(record: &StreamRecord) -> Vec<(Side, Identifier)> {
    match record {
        StreamRecord::E2o(r) => vec![(Side::Event, r.event_id.clone()), (Side::Object, r.object_id.clone())],
        StreamRecord::O2o(r) => vec![(Side::Object, r.source_id.clone()), (Side::Object, r.target_id.clone())],
        StreamRecord::E2e(r) => {
            vec![(Side::Event, r.source_event_id.clone()), (Side::Event, r.target_event_id.clone())]
        }
        StreamRecord::Event { links, .. } => links.iter().map(|(o, _)| (Side::Object, o.clone())).collect(),
        StreamRecord::Object(_) => Vec::new(),
    }
}

impl StreamSession {
    /// Replaces the clock used for the buffer-age trigger.
    pub fn with_clock(mut self, clock: impl Fn() -> Instant + Send + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn policy(&self) -> &SpillPolicy {
        &self.policy
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn lookup(&self) -> &LookupTable {
        &self.lookup
    }

    pub fn source(&self) -> &CoreObject {
        &self.source
    }

    pub fn source_id(&self) -> &Identifier {
        &self.source.object_id
    }

    pub fn locate(&self, namespace: Namespace, id: &Identifier) -> Option<Location> {
        let side = Side::from(namespace);
        if side == Side::Object && *id == self.source.object_id {
            return Some(Location::SessionSource);
        }
        if self.buffered.contains(&(side, id.clone())) {
            return Some(Location::Buffered);
        }
        self.lookup
            .spilled(namespace, id)
            .map(|(sequence_number, offset)| Location::Spilled { sequence_number, offset })
    }

    fn known(&self, key: &(Side, Identifier)) -> bool {
        (key.0 == Side::Object && key.1 == self.source.object_id)
            || self.buffered.contains(key)
            || self.lookup.spilled.contains_key(key)
    }

    pub fn ingest(&mut self, record: StreamRecord) -> Result<(), IngestError> {
        match record {
            StreamRecord::Object(object) => {
                let key = (Side::Object, object.object_id.clone());
                if self.known(&key) {
                    return Err(DuplicateId { namespace: Namespace::Object, id: object.object_id }.into());
                }
                self.push(StreamRecord::Object(object));
                self.release(&key);
            }
            StreamRecord::Event { event, links } => {
                let key = (Side::Event, event.event_id.clone());
                if self.known(&key) {
                    return Err(DuplicateId { namespace: Namespace::Event, id: event.event_id }.into());
                }
                event.check_class_rules().map_err(|e| IngestError::MalformedRecord(e.to_string()))?;
                let (ready, parked): (Vec<_>, Vec<_>) =
                    links.into_iter().partition(|(o, _)| self.known(&(Side::Object, o.clone())));
                for (object, qualifier) in parked {
                    let rel = EventObjectRel::new(event.event_id.clone(), object.clone(), qualifier);
                    self.lookup.park(StreamRecord::E2o(rel), vec![(Side::Object, object)]);
                }
                self.push(StreamRecord::Event { event, links: ready });
                self.release(&key);
            }
            relation => {
                match &relation {
                    StreamRecord::O2o(r) if r.source_id == r.target_id && r.qualifier != SELF_QUALIFIER => {
                        return Err(IngestError::MalformedRecord(RelError::SelfRelation(r.source_id.clone()).to_string()));
                    }
                    StreamRecord::E2e(r) if r.source_event_id == r.target_event_id => {
                        return Err(IngestError::MalformedRecord(format!("e2e self-loop on {}", r.source_event_id)));
                    }
                    _ => {}
                }
                let missing: Vec<_> = endpoints(&relation).into_iter().filter(|k| !self.known(k)).collect();
                if missing.is_empty() {
                    self.push(relation);
                } else {
                    self.lookup.park(relation, missing);
                }
            }
        }
        self.enforce_policy()?;
        Ok(())
    }

    fn push(&mut self, record: StreamRecord) {
        if let Some((side, id)) = introduces(&record) {
            self.buffered.insert((side, id.clone()));
        }
        if self.buffer.is_empty() {
            self.buffer_started = Some((self.clock)());
        }
        self.buffer.push(record);
    }

    /// Moves parked relations that were waiting on `key` into the buffer once
    /// all their endpoints are known.
    fn release(&mut self, key: &(Side, Identifier)) {
        for slot in self.lookup.take_waiting(key) {
            let ready = match &self.lookup.pending[slot] {
                Some(rel) => endpoints(rel).iter().all(|k| self.known(k)),
                None => false,
            };
            if ready {
                let rel = self.lookup.pending[slot].take().expect("checked above");
                self.lookup.pending_len -= 1;
                self.push(rel);
            }
        }
    }

    fn enforce_policy(&mut self) -> Result<(), SpillError> {
        if let Some(max) = self.policy.max_buffered_records {
            // A single ingest can release many parked relations at once.
            while self.buffer.len() >= max.get() {
                self.spill_prefix(max.get())?;
            }
        }
        if let (Some(age), Some(started)) = (self.policy.max_buffer_age, self.buffer_started) {
            if !self.buffer.is_empty() && (self.clock)().saturating_duration_since(started) >= age {
                self.spill()?;
            }
        }
        Ok(())
    }

    /// Writes the whole buffer as the next segment.
    pub fn spill(&mut self) -> Result<Segment, SpillError> {
        self.spill_prefix(self.buffer.len())
    }

    fn spill_prefix(&mut self, n: usize) -> Result<Segment, SpillError> {
        if n == 0 || self.buffer.is_empty() {
            return Err(SpillError::EmptyBuffer);
        }
        let n = n.min(self.buffer.len());
        let sequence_number = self.segments.len() as u64;
        let segment = write_segment(&self.policy.segment_directory, sequence_number, &self.buffer[..n])?;
        for (offset, record) in self.buffer.drain(..n).enumerate() {
            if let Some((side, id)) = introduces(&record) {
                let key = (side, id.clone());
                self.buffered.remove(&key);
                self.lookup.spilled.insert(key, (sequence_number, offset as u64));
            }
        }
        self.buffer_started = if self.buffer.is_empty() { None } else { Some((self.clock)()) };
        self.segments.push(segment.clone());
        Ok(segment)
    }

    /// Spills any residue, then merges every segment into one canonical log.
    /// The session source appears in the log only if a relation uses it.
    pub fn finalize(mut self) -> Result<Finalized, FinalizeError> {
        if !self.buffer.is_empty() {
            self.spill()?;
        }
        let mut objects = Vec::new();
        let mut events = Vec::new();
        let mut e2o = Vec::new();
        let mut o2o = Vec::new();
        let mut e2e = Vec::new();
        for segment in &self.segments {
            let records = read_segment(&segment.path).map_err(|source| FinalizeError::UnreadableSegment {
                sequence_number: segment.sequence_number,
                path: segment.path.clone(),
                source,
            })?;
            for record in records {
                match record {
                    StreamRecord::Object(o) => objects.push(o),
                    StreamRecord::Event { event, links } => {
                        e2o.extend(links.into_iter().map(|(o, q)| EventObjectRel::new(event.event_id.clone(), o, q)));
                        events.push(event);
                    }
                    StreamRecord::E2o(r) => e2o.push(r),
                    StreamRecord::O2o(r) => o2o.push(r),
                    StreamRecord::E2e(r) => e2e.push(r),
                }
            }
        }
        // Like the parsers' synthesized sources, the session source is kept
        // only when something refers to it.
        let source_id = &self.source.object_id;
        if e2o.iter().any(|r| &r.object_id == source_id)
            || o2o.iter().any(|r| &r.source_id == source_id || &r.target_id == source_id)
        {
            objects.push(self.source.clone());
        }
        let mut log = CoreLog::from_parts(objects, events, e2o, o2o, [], BTreeMap::new());
        let mut diagnostics = Vec::new();
        for rel in e2e {
            let subject = rel.source_event_id.clone();
            if let Err(e) = log.add_e2e(rel) {
                diagnostics.push(Diagnostic::about(Code::E008, subject, e.to_string()));
            }
        }
        for rel in self.lookup.pending() {
            let missing: Vec<String> = endpoints(rel)
                .into_iter()
                .filter(|k| !self.known(k))
                .map(|(side, id)| format!("{} {id}", if side == Side::Event { "event" } else { "object" }))
                .collect();
            let (subject, kind) = match rel {
                StreamRecord::E2o(r) => (&r.event_id, "e2o"),
                StreamRecord::O2o(r) => (&r.source_id, "o2o"),
                StreamRecord::E2e(r) => (&r.source_event_id, "e2e"),
                _ => unreachable!("only relations are parked"),
            };
            diagnostics.push(Diagnostic::about(
                Code::E005,
                subject,
                format!("{kind} relation never resolved: missing {}", missing.join(", ")),
            ));
        }
        normalize(&mut diagnostics);
        Ok(Finalized { log: log.into_canonical(), diagnostics, segments: self.segments, lookup: self.lookup })
    }
}
