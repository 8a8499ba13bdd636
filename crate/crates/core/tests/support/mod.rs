//! Generators shared by the property tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use corelog::model::{
    AttributeValue, CoreEvent, CoreLog, CoreObject, EventClass, EventEventRel, EventObjectRel, Identifier,
    LinkDirection, ObjectClass, ObjectObjectRel, Timestamp, SELF_QUALIFIER,
};
use corelog::streaming::StreamRecord;
use corelog::validation::{Code, Diagnostic};
use proptest::prelude::*;
use proptest::sample::Index;

/// 2024-01-01T00:00:00Z
const BASE_NANOS: i64 = 1_704_067_200_000_000_000;

pub fn arb_value() -> impl Strategy<Value = AttributeValue> {
    prop_oneof![
        "\\PC{0,12}".prop_map(AttributeValue::Text),
        prop_oneof![Just("1".to_string()), Just("null".into()), Just("'x".into()), Just("1.5e3".into()), Just(String::new())]
            .prop_map(AttributeValue::Text),
        any::<i64>().prop_map(AttributeValue::Integer),
        any::<f64>().prop_filter("finite", |r| r.is_finite()).prop_map(AttributeValue::Real),
        prop_oneof![Just(0.0), Just(-0.0), Just(1.0), Just(1e300), Just(0.1)].prop_map(AttributeValue::Real),
        any::<bool>().prop_map(AttributeValue::Boolean),
        Just(AttributeValue::Null),
    ]
}

/// Attribute names; the reserved `core:` prefix is moved out of the way.
pub fn arb_key() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_:./ ]{0,8}".prop_map(|k| if k.starts_with("core:") { format!("x{k}") } else { k })
}

fn arb_qualifier() -> impl Strategy<Value = String> {
    prop_oneof![Just(String::new()), "[a-z][a-z-]{0,8}", "\\PC{1,6}"]
}

fn arb_label() -> impl Strategy<Value = String> {
    "[A-Z][A-Za-z ]{0,10}"
}

#[derive(Debug, Clone)]
struct ObjectSpec {
    suffix: String,
    variant: Index,
    object_type: String,
    history: Vec<(String, i64, AttributeValue)>,
}

#[derive(Debug, Clone)]
struct EventSpec {
    suffix: String,
    kind: u8,
    label: String,
    offset_nanos: i64,
    attrs: Vec<(String, AttributeValue)>,
    data_source: (Index, String),
    business: Vec<(Index, String)>,
    general: Vec<(Index, String)>,
}

fn arb_object() -> impl Strategy<Value = ObjectSpec> {
    (
        "\\PC{0,3}",
        any::<Index>(),
        arb_label(),
        prop::collection::vec((arb_key(), 0i64..1_000_000, arb_value()), 0..4),
    )
        .prop_map(|(suffix, variant, object_type, history)| ObjectSpec { suffix, variant, object_type, history })
}

fn arb_event() -> impl Strategy<Value = EventSpec> {
    (
        "\\PC{0,3}",
        0u8..3,
        arb_label(),
        0i64..1_000_000_000,
        prop::collection::vec((arb_key(), arb_value()), 0..4),
        (any::<Index>(), arb_qualifier()),
        prop::collection::vec((any::<Index>(), arb_qualifier()), 1..3),
        prop::collection::vec((any::<Index>(), arb_qualifier()), 0..3),
    )
        .prop_map(|(suffix, kind, label, offset_nanos, attrs, data_source, business, general)| EventSpec {
            suffix,
            kind,
            label,
            offset_nanos,
            attrs,
            data_source,
            business,
            general,
        })
}

fn object_id(prefix: &str, i: usize, suffix: &str) -> Identifier {
    Identifier::new(format!("{prefix}{i}-{suffix}")).expect("non-empty, no control characters")
}

/// Strictly valid logs within the given size bounds: every event has exactly
/// one data source and at least one business object, e2e edges run forward
/// in time, and class rules hold.
pub fn arb_valid_log_sized(max_events: usize, max_objects: usize, max_e2e: usize) -> impl Strategy<Value = CoreLog> {
    assert!(max_objects >= 2);
    let max_ds = (max_objects / 5).max(1);
    let max_bus = ((max_objects - max_ds) / 2).max(1);
    let max_gen = max_objects - max_ds - max_bus;
    (
        prop::collection::vec(arb_object(), 1..=max_ds),
        prop::collection::vec(arb_object(), 1..=max_bus),
        prop::collection::vec(arb_object(), 0..=max_gen),
        prop::collection::vec(arb_event(), 1..=max_events),
        prop::collection::vec((any::<Index>(), any::<Index>(), arb_qualifier()), 0..=max_e2e),
        prop::collection::vec((any::<Index>(), any::<Index>(), arb_qualifier()), 0..=10),
        prop::collection::vec((arb_key(), arb_value()), 0..3),
    )
        .prop_map(|(ds, bus, gen, events, e2e, o2o, metadata)| {
            build_log(&ds, &bus, &gen, &events, &e2e, &o2o, metadata)
        })
}

/// Bounds of the lossless round-trip criterion.
pub fn arb_valid_log() -> impl Strategy<Value = CoreLog> {
    arb_valid_log_sized(200, 50, 100)
}

fn build_log(
    ds: &[ObjectSpec],
    bus: &[ObjectSpec],
    gen: &[ObjectSpec],
    events: &[EventSpec],
    e2e: &[(Index, Index, String)],
    o2o: &[(Index, Index, String)],
    metadata: Vec<(String, AttributeValue)>,
) -> CoreLog {
    let mut log = CoreLog::new(metadata.into_iter().collect());
    let classes = |spec: &ObjectSpec, group: &str| -> ObjectClass {
        let pick = |options: &[ObjectClass]| options[spec.variant.index(options.len())].clone();
        match group {
            "d" => pick(&[
                ObjectClass::Sensor,
                ObjectClass::InformationSystem,
                ObjectClass::Link(LinkDirection::BottomUp),
                ObjectClass::Link(LinkDirection::TopDown),
            ]),
            "b" => pick(&[ObjectClass::CaseObject, ObjectClass::ContextObject]),
            _ => pick(&[
                ObjectClass::Activity,
                ObjectClass::Subprocess,
                ObjectClass::Resource,
                ObjectClass::Machine,
                ObjectClass::Other(spec.object_type.to_lowercase()),
            ]),
        }
    };
    let mut ids: BTreeMap<&str, Vec<Identifier>> = BTreeMap::new();
    let mut all_objects = Vec::new();
    for (group, specs) in [("d", ds), ("b", bus), ("g", gen)] {
        for (i, spec) in specs.iter().enumerate() {
            let id = object_id(&format!("o{group}"), i, &spec.suffix);
            let mut obj = CoreObject::new(id.clone(), spec.object_type.clone(), classes(spec, group));
            for (k, ms, v) in &spec.history {
                obj.set_attribute(k.clone(), Timestamp::from_unix_nanos(BASE_NANOS + ms * 1_000_000), v.clone());
            }
            log.add_object(obj).expect("distinct ids");
            ids.entry(group).or_default().push(id.clone());
            all_objects.push(id);
        }
    }

    let mut event_ids = Vec::new();
    for (i, spec) in events.iter().enumerate() {
        let id = object_id("e", i, &spec.suffix);
        let at = Timestamp::from_unix_nanos(BASE_NANOS + i as i64 * 1_000_000_000 + spec.offset_nanos % 1_000_000_000);
        let mut ev = match spec.kind {
            0 => CoreEvent::observation(id.clone(), at),
            1 => CoreEvent::iot(id.clone(), at, spec.label.clone()),
            _ => CoreEvent::process(id.clone(), at, spec.label.clone()),
        };
        for (k, v) in &spec.attrs {
            ev.attributes.insert(k.clone(), v.clone());
        }
        let pick = |group: &str, (ix, q): &(Index, String)| -> Option<(Identifier, String)> {
            let pool = ids.get(group)?;
            Some((pool[ix.index(pool.len())].clone(), q.clone()))
        };
        let mut links: Vec<(Identifier, String)> = pick("d", &spec.data_source).into_iter().collect();
        links.extend(spec.business.iter().filter_map(|l| pick("b", l)));
        links.extend(spec.general.iter().filter_map(|l| pick("g", l)));
        log.add_event(ev, &links).expect("generated events are valid");
        event_ids.push(id);
    }

    for (a, b, q) in e2e {
        let (s, t) = (a.index(event_ids.len()), b.index(event_ids.len()));
        if s == t {
            continue;
        }
        let (s, t) = (s.min(t), s.max(t));
        log.add_e2e(EventEventRel::new(event_ids[s].clone(), event_ids[t].clone(), q.clone()))
            .expect("forward edges cannot close a cycle");
    }
    for (a, b, q) in o2o {
        let (s, t) = (&all_objects[a.index(all_objects.len())], &all_objects[b.index(all_objects.len())]);
        let q = if s == t { SELF_QUALIFIER.to_string() } else { q.clone() };
        log.add_o2o(ObjectObjectRel::new(s.clone(), t.clone(), q)).expect("both ends exist");
    }
    log
}

/// Splits a log into stream records. Some e2o links travel as separate
/// records, and `drop_objects` leaves objects out so that relations to them
/// stay unresolved.
pub fn decompose(log: &CoreLog, split_links: &BTreeSet<usize>, drop_objects: &BTreeSet<usize>) -> Vec<StreamRecord> {
    let mut out = Vec::new();
    for (i, o) in log.objects().values().enumerate() {
        if !drop_objects.contains(&i) {
            out.push(StreamRecord::Object(o.clone()));
        }
    }
    for (i, ev) in log.events().values().enumerate() {
        let links: Vec<_> = log.e2o_of(&ev.event_id).map(|r| (r.object_id.clone(), r.qualifier.clone())).collect();
        if split_links.contains(&i) {
            out.push(StreamRecord::event(ev.clone(), Vec::new()));
            out.extend(links.into_iter().map(|(o, q)| StreamRecord::E2o(EventObjectRel::new(ev.event_id.clone(), o, q))));
        } else {
            out.push(StreamRecord::event(ev.clone(), links));
        }
    }
    out.extend(log.o2o().iter().cloned().map(StreamRecord::O2o));
    out.extend(log.e2e().iter().cloned().map(StreamRecord::E2e));
    out
}

/// A shuffled stream of records, with some links split off and some objects
/// missing.
pub fn arb_stream() -> impl Strategy<Value = Vec<StreamRecord>> {
    (
        arb_valid_log_sized(25, 10, 15),
        prop::collection::btree_set(0usize..25, 0..10),
        prop::collection::btree_set(0usize..10, 0..2),
    )
        .prop_flat_map(|(log, split, drop)| Just(decompose(&log, &split, &drop)).prop_shuffle())
}

/// Reference for spill transparency: the same records applied with plain
/// log operations, objects and events first, then relations in stream order.
/// Returns the canonical log and the (code, subject) pairs of what was
/// dropped.
pub fn build_directly(source: &CoreObject, records: &[StreamRecord]) -> (CoreLog, BTreeSet<(Code, String)>) {
    let mut log = CoreLog::new(BTreeMap::new());
    let uses_source = records.iter().any(|r| match r {
        StreamRecord::Event { links, .. } => links.iter().any(|(o, _)| *o == source.object_id),
        StreamRecord::E2o(rel) => rel.object_id == source.object_id,
        StreamRecord::O2o(rel) => rel.source_id == source.object_id || rel.target_id == source.object_id,
        _ => false,
    });
    if uses_source {
        log.add_object(source.clone()).expect("empty log");
    }
    let mut dropped = BTreeSet::new();
    for r in records {
        if let StreamRecord::Object(o) = r {
            log.add_object(o.clone()).expect("stream ids are distinct");
        }
    }
    let mut relations = Vec::new();
    for r in records {
        match r {
            StreamRecord::Event { event, links } => {
                let (present, missing): (Vec<_>, Vec<_>) =
                    links.iter().cloned().partition(|(o, _)| log.object(o.as_str()).is_some());
                log.add_event(event.clone(), &present).expect("valid event");
                if !missing.is_empty() {
                    dropped.insert((Code::E005, event.event_id.to_string()));
                }
            }
            StreamRecord::Object(_) => {}
            other => relations.push(other.clone()),
        }
    }
    for r in relations {
        let (subject, result) = match r {
            StreamRecord::E2o(rel) => (rel.event_id.to_string(), log.add_e2o(rel)),
            StreamRecord::O2o(rel) => (rel.source_id.to_string(), log.add_o2o(rel)),
            StreamRecord::E2e(rel) => (rel.source_event_id.to_string(), log.add_e2e(rel)),
            _ => unreachable!(),
        };
        if let Err(e) = result {
            let code = if matches!(e, corelog::model::RelError::CycleDetected { .. }) { Code::E008 } else { Code::E005 };
            dropped.insert((code, subject));
        }
    }
    (log.into_canonical(), dropped)
}

pub fn code_subjects(diagnostics: &[Diagnostic]) -> BTreeSet<(Code, String)> {
    diagnostics.iter().map(|d| (d.code, d.subject.clone().unwrap_or_default())).collect()
}

/// `n` observations linked to `source`, one millisecond apart.
pub fn synthetic_observations(source: &Identifier, n: usize) -> impl Iterator<Item = StreamRecord> + '_ {
    (0..n).map(move |i| {
        let id = Identifier::new(format!("obs-{i:06}")).expect("valid");
        let at = Timestamp::from_unix_nanos(BASE_NANOS + i as i64 * 1_000_000);
        StreamRecord::event(
            CoreEvent::observation(id, at).with_attribute("value", (i % 997) as f64 / 10.0),
            vec![(source.clone(), "made-by".into())],
        )
    })
}

pub fn count_class(log: &CoreLog, class: EventClass) -> usize {
    log.events().values().filter(|e| e.event_class == class).count()
}

pub const CATALOG: [Code; 10] = [
    Code::E002,
    Code::E003,
    Code::E004,
    Code::E005,
    Code::E006,
    Code::E007,
    Code::E008,
    Code::W001,
    Code::W002,
    Code::W003,
];

pub fn fixtures() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Diagnostics a file yields through the reader its name points to.
pub fn diagnose(path: &std::path::Path) -> Vec<Diagnostic> {
    use corelog::ocel::{from_ocel, read_json};
    use corelog::parsers::{parse, MappingConfig, ParserProfile};

    let bytes = std::fs::read(path).unwrap();
    let name = path.file_name().unwrap().to_str().unwrap();
    if name.ends_with(".ocel.json") {
        let (doc, mut found) = read_json(bytes.as_slice()).unwrap();
        let (log, more) = from_ocel(&doc).unwrap();
        found.extend(more);
        found.extend(corelog::validation::validate(&log));
        return found;
    }
    let profile = if name.ends_with(".xml") {
        ParserProfile::Nice
    } else if name.starts_with("datastream_trier") {
        ParserProfile::DataStreamTrier
    } else if name.starts_with("datastream_tum") {
        ParserProfile::DataStreamTum
    } else if name.starts_with("cairo") {
        ParserProfile::Cairo
    } else {
        let mapping: MappingConfig =
            serde_json::from_slice(&std::fs::read(fixtures().join("custom_mapping.json")).unwrap()).unwrap();
        ParserProfile::Custom(mapping)
    };
    parse(&bytes, &profile).unwrap().diagnostics
}

/// The fixture under `diagnostics/` named after `code`.
pub fn trigger_fixture(code: Code) -> Option<std::path::PathBuf> {
    let prefix = code.as_str().to_lowercase();
    std::fs::read_dir(fixtures().join("diagnostics"))
        .ok()?
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_str().unwrap().starts_with(&prefix))
}

pub const CLEAN_FIXTURES: [&str; 5] =
    ["datastream_trier.xes", "datastream_tum.xes", "nice_smart_home.xml", "cairo_donation.xes", "custom_actions.jsonl"];
