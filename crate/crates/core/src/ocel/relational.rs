//! Relational CSV bundle: five RFC 4180 files with mandatory header rows.
//!
//! Cells are typed by their spelling: empty means absent, `null`, `true` and
//! `false` are literals, anything `i64` accepts is an integer and anything
//! `f64` accepts is a real. Text that would read back as something else is
//! prefixed with `'`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use super::bundle::{BundleSink, BundleSource};
use super::document::{EventAttribute, ObjectAttribute, OcelDocument, OcelEvent, OcelObject, Relationship};
use super::error::{DecodeError, WriteError};
use crate::model::{AttributeValue, Identifier, Timestamp};
use crate::validation::{Code, Diagnostic};

pub const OBJECTS_FILE: &str = "objects.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const CHANGES_FILE: &str = "object_attribute_changes.csv";
pub const E2O_FILE: &str = "e2o.csv";
pub const O2O_FILE: &str = "o2o.csv";
pub const BUNDLE_FILES: [&str; 5] = [OBJECTS_FILE, EVENTS_FILE, CHANGES_FILE, E2O_FILE, O2O_FILE];

const ATTR_PREFIX: &str = "ocel:attr:";
const OBJECTS_HEADER: [&str; 2] = ["ocel:oid", "ocel:type"];
const EVENTS_HEADER: [&str; 3] = ["ocel:eid", "ocel:type", "ocel:timestamp"];
const CHANGES_HEADER: [&str; 4] = ["ocel:oid", "name", "time", "value"];
const E2O_HEADER: [&str; 3] = ["ocel:eid", "ocel:oid", "ocel:qualifier"];
const O2O_HEADER: [&str; 3] = ["source", "target", "qualifier"];

pub fn encode_cell(value: &AttributeValue) -> String {
    match value {
        AttributeValue::Null => "null".into(),
        AttributeValue::Boolean(b) => b.to_string(),
        AttributeValue::Integer(i) => i.to_string(),
        AttributeValue::Real(r) => format!("{r:?}"),
        AttributeValue::Text(s) => {
            if matches!(decode_cell(s), Some(AttributeValue::Text(ref t)) if t == s) {
                s.clone()
            } else {
                format!("'{s}")
            }
        }
    }
}

/// `None` for an empty cell.
pub fn decode_cell(cell: &str) -> Option<AttributeValue> {
    if cell.is_empty() {
        return None;
    }
    if let Some(text) = cell.strip_prefix('\'') {
        return Some(AttributeValue::Text(text.to_string()));
    }
    let value = match cell {
        "null" => AttributeValue::Null,
        "true" => AttributeValue::Boolean(true),
        "false" => AttributeValue::Boolean(false),
        _ => {
            if let Ok(i) = cell.parse::<i64>() {
                AttributeValue::Integer(i)
            } else if let Ok(r) = cell.parse::<f64>() {
                AttributeValue::Real(r)
            } else {
                AttributeValue::Text(cell.to_string())
            }
        }
    };
    Some(value)
}

fn attr_columns<'a>(keys: impl Iterator<Item = &'a str>) -> Result<Vec<&'a str>, WriteError> {
    let keys: BTreeSet<&str> = keys.collect();
    if keys.contains("") {
        return Err(WriteError::ColumnCollision(String::new()));
    }
    Ok(keys.into_iter().collect())
}

fn writer<W: Write>(out: W, fixed: &[&str], attrs: &[&str]) -> Result<csv::Writer<W>, WriteError> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> =
        fixed.iter().map(|s| s.to_string()).chain(attrs.iter().map(|k| format!("{ATTR_PREFIX}{k}"))).collect();
    w.write_record(&header)?;
    Ok(w)
}

pub fn write_relational(doc: &OcelDocument, sink: &mut dyn BundleSink) -> Result<(), WriteError> {
    let object_keys = attr_columns(doc.objects.iter().flat_map(|o| o.attributes.iter().map(|a| a.name.as_str())))?;
    let mut w = writer(sink.create(OBJECTS_FILE)?, &OBJECTS_HEADER, &object_keys)?;
    for o in &doc.objects {
        let mut earliest: BTreeMap<&str, &ObjectAttribute> = BTreeMap::new();
        for a in &o.attributes {
            earliest.entry(&a.name).and_modify(|cur| if a.time < cur.time { *cur = a }).or_insert(a);
        }
        let mut row = vec![o.id.to_string(), o.object_type.clone()];
        row.extend(object_keys.iter().map(|k| earliest.get(k).map(|a| encode_cell(&a.value)).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    drop(w);

    let mut w = writer(sink.create(CHANGES_FILE)?, &CHANGES_HEADER, &[])?;
    for o in &doc.objects {
        for a in &o.attributes {
            w.write_record([o.id.as_str(), &a.name, &a.time.to_canonical_string(), &encode_cell(&a.value)])?;
        }
    }
    w.flush()?;
    drop(w);

    let event_keys = attr_columns(doc.events.iter().flat_map(|e| e.attributes.iter().map(|a| a.name.as_str())))?;
    let mut w = writer(sink.create(EVENTS_FILE)?, &EVENTS_HEADER, &event_keys)?;
    for e in &doc.events {
        let mut cells: BTreeMap<&str, String> = BTreeMap::new();
        for a in &e.attributes {
            if cells.insert(&a.name, encode_cell(&a.value)).is_some() {
                return Err(WriteError::ColumnCollision(a.name.clone()));
            }
        }
        let mut row = vec![e.id.to_string(), e.event_type.clone(), e.time.to_canonical_string()];
        row.extend(event_keys.iter().map(|k| cells.remove(k).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    drop(w);

    let mut w = writer(sink.create(E2O_FILE)?, &E2O_HEADER, &[])?;
    for e in &doc.events {
        for r in &e.relationships {
            w.write_record([e.id.as_str(), r.object_id.as_str(), &r.qualifier])?;
        }
    }
    w.flush()?;
    drop(w);

    let mut w = writer(sink.create(O2O_FILE)?, &O2O_HEADER, &[])?;
    for o in &doc.objects {
        for r in &o.relationships {
            w.write_record([o.id.as_str(), r.object_id.as_str(), &r.qualifier])?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Table<'a> {
    file: &'static str,
    reader: csv::Reader<Box<dyn Read + 'a>>,
    /// Attribute keys of the `ocel:attr:` columns after the fixed ones.
    attrs: Vec<String>,
}

impl<'a> Table<'a> {
    fn open(source: &'a dyn BundleSource, file: &'static str, fixed: &[&str], with_attrs: bool) -> Result<Self, DecodeError> {
        let raw = source.open(file)?.ok_or_else(|| DecodeError::MissingFile(file.to_string()))?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(raw);
        let header = reader.headers().map_err(|e| csv_error(file, e))?.clone();
        let found: Vec<&str> = header.iter().collect();
        let mismatch = || DecodeError::HeaderMismatch {
            file: file.to_string(),
            expected: if with_attrs { format!("{},{ATTR_PREFIX}*", fixed.join(",")) } else { fixed.join(",") },
            found: found.join(","),
        };
        if found.len() < fixed.len() || found[..fixed.len()] != *fixed || (!with_attrs && found.len() != fixed.len()) {
            return Err(mismatch());
        }
        let mut attrs = Vec::new();
        for col in &found[fixed.len()..] {
            match col.strip_prefix(ATTR_PREFIX) {
                Some(key) if !key.is_empty() && !attrs.iter().any(|a| a == key) => attrs.push(key.to_string()),
                _ => return Err(mismatch()),
            }
        }
        Ok(Self { file, reader, attrs })
    }

    fn next_row(&mut self) -> Option<Result<(u64, csv::StringRecord), DecodeError>> {
        let mut rec = csv::StringRecord::new();
        match self.reader.read_record(&mut rec) {
            Ok(false) => None,
            Ok(true) => Some(Ok((rec.position().map(|p| p.line()).unwrap_or(0), rec))),
            Err(e) => Some(Err(csv_error(self.file, e))),
        }
    }
}

fn csv_error(file: &str, e: csv::Error) -> DecodeError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => DecodeError::Io(io),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => DecodeError::MalformedRow {
            file: file.to_string(),
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        other => DecodeError::MalformedRow { file: file.to_string(), line, message: format!("{other:?}") },
    }
}

fn row_error(file: &str, line: u64, message: impl Into<String>) -> DecodeError {
    DecodeError::MalformedRow { file: file.to_string(), line, message: message.into() }
}

fn row_id(file: &str, line: u64, raw: &str) -> Result<Identifier, DecodeError> {
    Identifier::new(raw).map_err(|e| row_error(file, line, e.to_string()))
}

fn row_time(file: &str, line: u64, raw: &str, diagnostics: &mut Vec<Diagnostic>, subject: &Identifier) -> Result<Timestamp, DecodeError> {
    let parsed = Timestamp::parse_lenient(raw).map_err(|e| row_error(file, line, e.to_string()))?;
    if parsed.assumed_utc {
        diagnostics.push(Diagnostic::about(Code::W002, subject, format!("timestamp {raw:?} has no offset; read as UTC")));
    }
    Ok(parsed.timestamp)
}

/// Reads a bundle back into a canonical document.
pub fn read_relational(source: &dyn BundleSource) -> Result<(OcelDocument, Vec<Diagnostic>), DecodeError> {
    let mut diagnostics = Vec::new();

    let mut table = Table::open(source, OBJECTS_FILE, &OBJECTS_HEADER, true)?;
    let attrs = table.attrs.clone();
    let mut objects = Vec::new();
    let mut index: BTreeMap<Identifier, usize> = BTreeMap::new();
    // (object index, key) -> (line, first value as given in objects.csv)
    let mut snapshot: BTreeMap<(usize, String), (u64, AttributeValue)> = BTreeMap::new();
    while let Some(row) = table.next_row() {
        let (line, rec) = row?;
        let id = row_id(OBJECTS_FILE, line, &rec[0])?;
        if index.insert(id.clone(), objects.len()).is_some() {
            return Err(row_error(OBJECTS_FILE, line, format!("duplicate object {id}")));
        }
        for (key, cell) in attrs.iter().zip(rec.iter().skip(OBJECTS_HEADER.len())) {
            if let Some(v) = decode_cell(cell) {
                snapshot.insert((objects.len(), key.clone()), (line, v));
            }
        }
        objects.push(OcelObject { id, object_type: rec[1].to_string(), attributes: Vec::new(), relationships: Vec::new() });
    }

    let mut table = Table::open(source, CHANGES_FILE, &CHANGES_HEADER, false)?;
    while let Some(row) = table.next_row() {
        let (line, rec) = row?;
        let id = row_id(CHANGES_FILE, line, &rec[0])?;
        let &i = index.get(&id).ok_or_else(|| row_error(CHANGES_FILE, line, format!("unknown object {id}")))?;
        let time = row_time(CHANGES_FILE, line, &rec[2], &mut diagnostics, &id)?;
        let value = decode_cell(&rec[3]).ok_or_else(|| row_error(CHANGES_FILE, line, "empty value"))?;
        objects[i].attributes.push(ObjectAttribute { name: rec[1].to_string(), time, value });
    }
    for (i, o) in objects.iter().enumerate() {
        let mut earliest: BTreeMap<&str, &ObjectAttribute> = BTreeMap::new();
        for a in &o.attributes {
            earliest.entry(&a.name).and_modify(|cur| if a.time < cur.time { *cur = a }).or_insert(a);
        }
        for (key, a) in &earliest {
            match snapshot.remove(&(i, key.to_string())) {
                Some((_, v)) if v == a.value => {}
                Some((line, _)) => {
                    return Err(row_error(OBJECTS_FILE, line, format!("{key} disagrees with {CHANGES_FILE}")))
                }
                None => {
                    return Err(DecodeError::MalformedRow {
                        file: OBJECTS_FILE.into(),
                        line: 0,
                        message: format!("object {} lacks column value for {key} listed in {CHANGES_FILE}", o.id),
                    })
                }
            }
        }
    }
    if let Some(((_, key), (line, _))) = snapshot.into_iter().next() {
        return Err(row_error(OBJECTS_FILE, line, format!("{key} has no entry in {CHANGES_FILE}")));
    }

    let mut table = Table::open(source, EVENTS_FILE, &EVENTS_HEADER, true)?;
    let attrs = table.attrs.clone();
    let mut events = Vec::new();
    let mut event_index: BTreeMap<Identifier, usize> = BTreeMap::new();
    while let Some(row) = table.next_row() {
        let (line, rec) = row?;
        let id = row_id(EVENTS_FILE, line, &rec[0])?;
        if event_index.insert(id.clone(), events.len()).is_some() {
            return Err(row_error(EVENTS_FILE, line, format!("duplicate event {id}")));
        }
        let time = row_time(EVENTS_FILE, line, &rec[2], &mut diagnostics, &id)?;
        let attributes = attrs
            .iter()
            .zip(rec.iter().skip(EVENTS_HEADER.len()))
            .filter_map(|(key, cell)| decode_cell(cell).map(|value| EventAttribute { name: key.clone(), value }))
            .collect();
        events.push(OcelEvent { id, event_type: rec[1].to_string(), time, attributes, relationships: Vec::new() });
    }

    let mut table = Table::open(source, E2O_FILE, &E2O_HEADER, false)?;
    while let Some(row) = table.next_row() {
        let (line, rec) = row?;
        let eid = row_id(E2O_FILE, line, &rec[0])?;
        let &i = event_index.get(&eid).ok_or_else(|| row_error(E2O_FILE, line, format!("unknown event {eid}")))?;
        events[i].relationships.push(Relationship::new(row_id(E2O_FILE, line, &rec[1])?, &rec[2]));
    }

    let mut table = Table::open(source, O2O_FILE, &O2O_HEADER, false)?;
    while let Some(row) = table.next_row() {
        let (line, rec) = row?;
        let source_id = row_id(O2O_FILE, line, &rec[0])?;
        let &i = index.get(&source_id).ok_or_else(|| row_error(O2O_FILE, line, format!("unknown object {source_id}")))?;
        objects[i].relationships.push(Relationship::new(row_id(O2O_FILE, line, &rec[1])?, &rec[2]));
    }

    let doc = OcelDocument { objects, events, ..Default::default() }.into_canonical();
    Ok((doc, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id;
    use crate::ocel::MemoryBundle;

    #[test]
    fn cells_keep_their_tags() {
        let samples = [
            AttributeValue::Integer(206),
            AttributeValue::Real(206.0),
            AttributeValue::Real(-0.0),
            AttributeValue::Real(1e300),
            AttributeValue::Boolean(true),
            AttributeValue::Null,
            AttributeValue::Text("206".into()),
            AttributeValue::Text("".into()),
            AttributeValue::Text("null".into()),
            AttributeValue::Text("'quoted".into()),
            AttributeValue::Text("inf".into()),
            AttributeValue::Text("kitchen, north".into()),
        ];
        for v in samples {
            let cell = encode_cell(&v);
            assert_eq!(decode_cell(&cell), Some(v.clone()), "{cell}");
        }
        assert_eq!(encode_cell(&206.into()), "206");
        assert_eq!(decode_cell(""), None);
    }

    fn sample() -> OcelDocument {
        let t = Timestamp::UNIX_EPOCH;
        let later = Timestamp::from_unix_millis(5000).unwrap();
        OcelDocument {
            objects: vec![
                OcelObject {
                    id: id!("o5"),
                    object_type: "Tank".into(),
                    attributes: vec![
                        ObjectAttribute { name: "flow".into(), time: later, value: 204.into() },
                        ObjectAttribute { name: "flow".into(), time: t, value: 206.into() },
                    ],
                    relationships: vec![],
                },
                OcelObject {
                    id: id!("o4"),
                    object_type: "Flow sensor".into(),
                    attributes: vec![],
                    relationships: vec![Relationship::new(id!("o5"), "located-at")],
                },
            ],
            events: vec![OcelEvent {
                id: id!("e7423"),
                event_type: "observed".into(),
                time: t,
                attributes: vec![EventAttribute { name: "value".into(), value: 206.into() }],
                relationships: vec![Relationship::new(id!("o4"), "made-by")],
            }],
            ..Default::default()
        }
        .into_canonical()
    }

    #[test]
    fn bundle_round_trip() {
        let mut bundle = MemoryBundle::default();
        write_relational(&sample(), &mut bundle).unwrap();
        let events = String::from_utf8(bundle.files[EVENTS_FILE].clone()).unwrap();
        assert_eq!(events, "ocel:eid,ocel:type,ocel:timestamp,ocel:attr:value\ne7423,observed,1970-01-01T00:00:00Z,206\n");
        let objects = String::from_utf8(bundle.files[OBJECTS_FILE].clone()).unwrap();
        assert!(objects.contains("o5,Tank,206\n"), "{objects}");
        let (back, diagnostics) = read_relational(&bundle).unwrap();
        assert!(diagnostics.is_empty());
        assert_eq!(back, sample());
    }

    #[test]
    fn empty_document_writes_headers_only() {
        let mut bundle = MemoryBundle::default();
        write_relational(&OcelDocument::default(), &mut bundle).unwrap();
        assert_eq!(bundle.files.len(), 5);
        assert_eq!(bundle.files[O2O_FILE], b"source,target,qualifier\n");
        assert_eq!(read_relational(&bundle).unwrap().0, OcelDocument::default());
    }

    #[test]
    fn read_errors_name_file_and_line() {
        let mut bundle = MemoryBundle::default();
        write_relational(&sample(), &mut bundle).unwrap();

        let mut missing = bundle.clone();
        missing.files.remove(O2O_FILE);
        assert!(matches!(read_relational(&missing), Err(DecodeError::MissingFile(f)) if f == O2O_FILE));

        let mut torn = bundle.clone();
        torn.files.get_mut(E2O_FILE).unwrap().extend_from_slice(b"e7423,o5,kitchen,north\n");
        match read_relational(&torn) {
            Err(DecodeError::MalformedRow { file, line, .. }) => assert_eq!((file.as_str(), line), (E2O_FILE, 3)),
            other => panic!("{other:?}"),
        }

        let mut renamed = bundle;
        renamed.files.insert(O2O_FILE.into(), b"from,to,qualifier\n".to_vec());
        assert!(matches!(read_relational(&renamed), Err(DecodeError::HeaderMismatch { .. })));
    }
}
