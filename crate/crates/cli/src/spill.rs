use std::collections::BTreeMap;
use std::fs;

use corelog::model::CoreLog;
use corelog::streaming::{open_session, SpillPolicy, StreamRecord, SEGMENT_DIR_ENV};
use corelog::validation::Diagnostic;

use crate::{Exit, Failure};

/// What came back out of the session.
pub struct Streamed {
    pub log: CoreLog,
    pub diagnostics: Vec<Diagnostic>,
    pub segments: usize,
}

/// An id the log does not use, so the session source stays unreferenced
/// and is left out at finalize.
fn free_source_id(log: &CoreLog) -> String {
    let mut id = String::from("corelog:stream");
    while log.object(&id).is_some() {
        id.push('_');
    }
    id
}

/// Replays `log` through a spill session flushing every `max_records`
/// records, under a scratch directory removed afterwards.
pub fn stream_through(log: CoreLog, max_records: usize) -> Result<Streamed, Failure> {
    if max_records == 0 {
        return Err(Failure::io("--spill-records must be at least 1"));
    }
    let root = SpillPolicy::directory_from_env(std::env::temp_dir());
    fs::create_dir_all(&root).map_err(|e| Failure::io(format!("{SEGMENT_DIR_ENV} {}: {e}", root.display())))?;
    let scratch = tempfile::Builder::new()
        .prefix("corelog-segments-")
        .tempdir_in(&root)
        .map_err(|e| Failure::io(format!("cannot create segment directory under {}: {e}", root.display())))?;

    let descriptor = BTreeMap::from([("id".to_string(), free_source_id(&log))]);
    let mut session = open_session(SpillPolicy::by_count(max_records, scratch.path()), &descriptor)
        .map_err(|e| Failure::io(e.to_string()))?;

    let mut records: Vec<StreamRecord> = log.objects().values().cloned().map(StreamRecord::Object).collect();
    for ev in log.events().values() {
        let links = log.e2o_of(&ev.event_id).map(|r| (r.object_id.clone(), r.qualifier.clone())).collect();
        records.push(StreamRecord::event(ev.clone(), links));
    }
    records.extend(log.o2o().iter().cloned().map(StreamRecord::O2o));
    records.extend(log.e2e().iter().cloned().map(StreamRecord::E2e));
    for record in records {
        session.ingest(record).map_err(|e| Failure { exit: Exit::Errors, message: format!("cannot stream: {e}") })?;
    }

    let done = session.finalize().map_err(|e| Failure::io(e.to_string()))?;
    let mut out = done.log;
    *out.metadata_mut() = log.metadata().clone();
    Ok(Streamed { log: out, diagnostics: done.diagnostics, segments: done.segments.len() })
}
