//! Acceptance run: one line per criterion, non-zero exit if any fails.
//! Built with `harness = false` so the lines are never captured.

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use corelog::model::{
    lineage, CoreEvent, CoreLog, CoreObject, EventClass, EventDraft, Identifier, LinkDirection, ObjectClass, Timestamp,
};
use corelog::ocel::{
    round_trip, to_ocel, to_ocel_with, write_json, EncodeMode, OcelFormat, E2E_LINK_TYPE, E2E_SOURCE, E2E_TARGET, METADATA_ID,
};
use corelog::parsers::{count, parse, MappingConfig, ParseReport, ParserProfile};
use corelog::running_example::{self as example, running_example};
use corelog::streaming::{open_session, SpillPolicy, StreamRecord};
use corelog::validation::{validate, Code};
use proptest::test_runner::{Config, TestRunner};
use support::{arb_valid_log, build_directly, diagnose, fixtures, synthetic_observations, trigger_fixture, CATALOG, CLEAN_FIXTURES};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(started: Instant, limit: Duration) -> Result<String, String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(format!("{took:.2?}"))
}

fn id(raw: &str) -> Identifier {
    Identifier::new(raw).unwrap()
}

fn running_example_reconstruction() -> Outcome {
    let started = Instant::now();
    let log = running_example();
    let errors: Vec<_> = validate(&log).into_iter().filter(|d| d.is_error()).collect();
    ensure(errors.is_empty(), || format!("validate: {errors:?}"))?;

    let types: BTreeMap<&str, (&str, ObjectClass)> = [
        (example::FLOW_SENSOR, ("Flow sensor", ObjectClass::Sensor)),
        (example::TANK, ("Tank", ObjectClass::ContextObject)),
        (example::SAMPLE_RULE, ("Analytics", ObjectClass::Link(LinkDirection::BottomUp))),
        (example::PEAK_ANALYTICS, ("Analytics", ObjectClass::Link(LinkDirection::BottomUp))),
        (example::BATCH, ("Batch", ObjectClass::CaseObject)),
    ]
    .into();
    for (oid, (ty, class)) in &types {
        let o = log.object(oid).ok_or(format!("missing object {oid}"))?;
        ensure(o.object_type == *ty && o.object_class == *class, || format!("{oid} is {} {}", o.object_type, o.object_class))?;
    }
    let value = log.event("e7423").and_then(|e| e.attributes.get("value")).cloned();
    ensure(value == Some(206.into()), || format!("e7423 value {value:?}"))?;
    ensure(log.event(example::PEAK).is_some_and(|e| e.event_type == "Peak detected"), || "e7556".into())?;
    ensure(log.event(example::TAKE_SAMPLE).is_some_and(|e| e.event_type == "Take sample"), || "e7557".into())?;

    let doc = to_ocel(&log).map_err(|e| e.to_string())?;
    let links: Vec<_> = doc.objects.iter().filter(|o| o.object_type == E2E_LINK_TYPE).collect();
    ensure(links.len() == log.e2e().len(), || format!("{} link objects for {} e2e edges", links.len(), log.e2e().len()))?;
    let mut rows: BTreeMap<&Identifier, (usize, usize)> = BTreeMap::new();
    for ev in &doc.events {
        for r in &ev.relationships {
            let slot = rows.entry(&r.object_id).or_default();
            match r.qualifier.as_str() {
                E2E_SOURCE => slot.0 += 1,
                E2E_TARGET => slot.1 += 1,
                _ => {}
            }
        }
    }
    for link in &links {
        let got = rows.get(&link.id).copied().unwrap_or_default();
        ensure(got == (1, 1), || format!("{} has source/target rows {got:?}", link.id))?;
    }
    let e2e_rows: usize = rows.values().map(|(s, t)| s + t).sum();
    ensure(e2e_rows == 2 * log.e2e().len(), || format!("{e2e_rows} e2e rows"))?;
    Ok(format!("{} e2e edges, {}", log.e2e().len(), within(started, Duration::from_secs(1))?))
}

fn lossless_round_trip() -> Outcome {
    let started = Instant::now();
    let mut runner = TestRunner::new(Config { cases: 500, failure_persistence: None, ..Config::default() });
    let cases = std::cell::Cell::new(0usize);
    runner
        .run(&arb_valid_log(), |log| {
            cases.set(cases.get() + 1);
            let expected = log.canonicalize();
            for format in OcelFormat::ALL {
                let back = round_trip(&log, format, EncodeMode::Strict)
                    .map_err(|e| proptest::test_runner::TestCaseError::fail(format!("{format}: {e}")))?;
                proptest::prop_assert_eq!(&back, &expected, "{}", format);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let cases = cases.get();
    ensure(cases >= 500, || format!("only {cases} cases ran"))?;
    Ok(format!("{cases} logs x 2 formats, {}", within(started, Duration::from_secs(60))?))
}

fn survives(log: &CoreLog) -> Result<(), String> {
    for format in OcelFormat::ALL {
        let back = round_trip(log, format, EncodeMode::Strict).map_err(|e| format!("{format}: {e}"))?;
        ensure(back == log.canonicalize(), || format!("{format} round trip differs"))?;
    }
    Ok(())
}

fn requirement_suite() -> Outcome {
    let example = running_example();
    let t = |s: i64| Timestamp::from_unix_millis(1_720_000_000_000 + s * 1000).unwrap();

    // R1
    for class in [EventClass::Observation, EventClass::IotEvent, EventClass::ProcessEvent] {
        ensure(example.count_events(class) > 0, || format!("R1: no {class}"))?;
    }
    let back = round_trip(&example, OcelFormat::Json, EncodeMode::Strict).map_err(|e| e.to_string())?;
    ensure(back.events().iter().all(|(k, e)| example.event(k.as_str()).unwrap().event_class == e.event_class), || {
        "R1: classes blur after round trip".into()
    })?;

    // R2
    let mut ctx = CoreLog::default();
    ctx.add_object(CoreObject::new(id("thermo"), "Thermometer", ObjectClass::Sensor)).unwrap();
    ctx.add_object(CoreObject::new(id("kitchen"), "Room", ObjectClass::ContextObject)).unwrap();
    let mut readings = Vec::new();
    for i in 0..3 {
        let eid = id(&format!("r{i}"));
        ctx.add_event(
            CoreEvent::observation(eid.clone(), t(i)).with_attribute("celsius", 20.0 + i as f64),
            &[(id("thermo"), "made-by".into()), (id("kitchen"), "observes".into())],
        )
        .map_err(|e| e.to_string())?;
        readings.push(eid);
    }
    let rule = CoreObject::new(id("heat"), "Analytics", ObjectClass::Link(LinkDirection::BottomUp));
    ctx.derive_event(rule, &readings, EventDraft::iot(id("hot"), "Kitchen hot"), &[(id("kitchen"), "room".into())])
        .map_err(|e| e.to_string())?;
    ensure(ctx.count_events(EventClass::ProcessEvent) == 0 && validate(&ctx).is_empty(), || "R2: context log".into())?;
    survives(&ctx).map_err(|e| format!("R2: {e}"))?;

    // R3
    let sample = id(example::TAKE_SAMPLE);
    let peaks: BTreeSet<_> = [example::FIRST_PEAKS[0], example::FIRST_PEAKS[1], example::PEAK].map(id).into();
    ensure(lineage::sources(&example, &sample) == peaks, || "R3: direct sources".into())?;
    let ancestors = lineage::ancestors(&example, &sample);
    let observations: BTreeSet<_> = peaks.iter().flat_map(|p| lineage::sources(&example, p)).collect();
    ensure(peaks.is_subset(&ancestors) && observations.is_subset(&ancestors), || "R3: transitive closure".into())?;

    // R4, R7
    let mut annotated = example.clone();
    annotated.metadata_mut().insert("ontology".into(), "https://example.org/onto".into());
    let doc = to_ocel(&annotated).map_err(|e| e.to_string())?;
    ensure(doc.objects.iter().any(|o| o.id.as_str() == METADATA_ID), || "R7: no metadata object".into())?;
    survives(&annotated).map_err(|e| format!("R4/R7: {e}"))?;

    // R5
    let mut two = CoreLog::default();
    two.add_object(CoreObject::new(id("erp"), "ERP", ObjectClass::InformationSystem)).unwrap();
    two.add_object(CoreObject::new(id("order"), "Order", ObjectClass::CaseObject)).unwrap();
    two.add_object(CoreObject::new(id("batch"), "Batch", ObjectClass::CaseObject)).unwrap();
    two.add_event(
        CoreEvent::process(id("pack"), t(0), "Pack"),
        &[(id("erp"), "recorded-by".into()), (id("order"), "order".into()), (id("batch"), "batch".into())],
    )
    .map_err(|e| e.to_string())?;
    survives(&two).map_err(|e| format!("R5: {e}"))?;

    // R6
    let classes: Vec<_> = example.objects().values().map(|o| o.object_class.clone()).collect();
    ensure(
        classes.contains(&ObjectClass::Sensor)
            && classes.contains(&ObjectClass::InformationSystem)
            && classes.iter().any(|c| matches!(c, ObjectClass::Link(_))),
        || "R6: data-source kinds".into(),
    )?;
    survives(&example).map_err(|e| format!("R6: {e}"))?;
    Ok(format!("R1..R7, {} observations traced", observations.len()))
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixtures().join(name)).unwrap()
}

fn reconcile(name: &str, report: &ParseReport, source_records: usize) -> Result<(), String> {
    let log = &report.log;
    let pairs = [
        (count::SOURCE_EVENTS, source_records),
        (count::PARSED_EVENTS, log.events().len()),
        (count::OBJECTS, log.objects().len()),
        (count::E2O, log.e2o().len()),
        (count::O2O, log.o2o().len()),
        (count::E2E, log.e2e().len()),
    ];
    for (key, expected) in pairs {
        ensure(report.count(key) == expected, || format!("{name}: {key} {} != {expected}", report.count(key)))?;
    }
    let accounted = report.count(count::PARSED_EVENTS) + report.count(count::SKIPPED_EVENTS);
    ensure(accounted == source_records, || format!("{name}: parsed+skipped {accounted} != {source_records}"))
}

fn parser_fixtures() -> Outcome {
    let run = |name: &str, profile: ParserProfile| parse(read(name).as_bytes(), &profile).map_err(|e| format!("{name}: {e}"));

    let trier = run("datastream_trier.xes", ParserProfile::DataStreamTrier)?;
    let t = &trier.log;
    ensure(
        t.count_events(EventClass::ProcessEvent) == 1
            && t.count_events(EventClass::Observation) == 2
            && t.objects().values().any(|o| o.object_class == ObjectClass::Resource),
        || "trier: expected 1 process event, 2 observations and a resource".into(),
    )?;
    // one concept:name event plus its two points
    reconcile("trier", &trier, 3)?;

    let tum_doc = read("datastream_tum.xes");
    let tum = run("datastream_tum.xes", ParserProfile::DataStreamTum)?;
    let m = &tum.log;
    ensure(m.objects().values().any(|o| o.object_class == ObjectClass::Machine), || "tum: no machine objects".into())?;
    ensure(
        !m.e2e().is_empty()
            && m.e2e().iter().all(|r| {
                m.event(r.source_event_id.as_str()).unwrap().event_class == EventClass::Observation
                    && m.event(r.target_event_id.as_str()).unwrap().event_class == EventClass::ProcessEvent
            }),
        || "tum: e2e edges must run observation to process event".into(),
    )?;
    let points = tum_doc.matches("key=\"stream:point\"").count();
    let named = tum_doc
        .split("<event>")
        .skip(1)
        .filter(|body| body.split("key=\"stream:datastream\"").next().unwrap().contains("key=\"concept:name\""))
        .count();
    reconcile("tum", &tum, points + named)?;

    let nice_doc = read("nice_smart_home.xml");
    let nice = run("nice_smart_home.xml", ParserProfile::Nice)?;
    let n = &nice.log;
    let sensors: BTreeSet<_> =
        n.objects().values().filter(|o| o.object_class == ObjectClass::Sensor).map(|o| o.object_id.clone()).collect();
    ensure(!sensors.is_empty(), || "nice: no sensors".into())?;
    ensure(n.o2o().iter().any(|r| sensors.contains(&r.source_id) && r.qualifier == "located-at"), || {
        "nice: no sensor location edges".into()
    })?;
    let nice_events = ["<iotEvent", "<processEvent", "<contextEvent"].iter().map(|t| nice_doc.matches(t).count()).sum();
    reconcile("nice", &nice, nice_events)?;

    let cairo_doc = read("cairo_donation.xes");
    let cairo = run("cairo_donation.xes", ParserProfile::Cairo)?;
    let traces = cairo_doc.matches("<trace>").count();
    let cases = cairo.log.objects().values().filter(|o| o.object_class == ObjectClass::CaseObject).count();
    ensure(cases == traces, || format!("cairo: {cases} case objects for {traces} traces"))?;
    reconcile("cairo", &cairo, cairo_doc.matches("<event>").count())?;

    let mapping: MappingConfig = serde_json::from_str(&read("custom_mapping.json")).map_err(|e| e.to_string())?;
    let custom_doc = read("custom_actions.jsonl");
    let custom = run("custom_actions.jsonl", ParserProfile::Custom(mapping))?;
    reconcile("custom", &custom, custom_doc.lines().filter(|l| !l.trim().is_empty()).count())?;

    Ok("trier, tum, nice, cairo, custom reconcile".into())
}

fn canonical_json(log: &CoreLog) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    write_json(&to_ocel_with(log, EncodeMode::Lenient).map_err(|e| e.to_string())?, &mut out).map_err(|e| e.to_string())?;
    Ok(out)
}

fn streaming_equivalence() -> Outcome {
    const N: usize = 100_000;
    const MAX: usize = 10_000;
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let descriptor = BTreeMap::from([("kind".to_string(), "sensor".to_string()), ("name".to_string(), "flow-1".to_string())]);
    let mut session = open_session(SpillPolicy::by_count(MAX, dir.path()), &descriptor).map_err(|e| e.to_string())?;
    let source = session.source().clone();
    let mut peak = 0;
    for record in synthetic_observations(&source.object_id, N) {
        session.ingest(record).map_err(|e| e.to_string())?;
        peak = peak.max(session.buffer_len());
    }
    ensure(peak <= MAX, || format!("buffer reached {peak}"))?;
    let done = session.finalize().map_err(|e| e.to_string())?;
    ensure(done.segments.len() == N / MAX, || format!("{} segments", done.segments.len()))?;
    ensure(done.diagnostics.is_empty(), || format!("{:?}", done.diagnostics.first()))?;

    let records: Vec<StreamRecord> = synthetic_observations(&source.object_id, N).collect();
    let mut unspilled = build_directly(&source, &records).0;
    *unspilled.metadata_mut() = done.log.metadata().clone();
    let (spilled, direct) = (canonical_json(&done.log)?, canonical_json(&unspilled)?);
    ensure(spilled == direct, || format!("JSON differs ({} vs {} bytes)", spilled.len(), direct.len()))?;
    Ok(format!("{} segments, peak buffer {peak}, {} bytes, {}", done.segments.len(), spilled.len(), within(started, Duration::from_secs(30))?))
}

fn catalog_coverage() -> Outcome {
    for code in CATALOG {
        let path = trigger_fixture(code).ok_or(format!("no fixture for {code}"))?;
        let found = diagnose(&path);
        ensure(found.iter().any(|d| d.code == code), || format!("{} does not yield {code}", path.display()))?;
    }
    let mut clean: Vec<(String, Vec<_>)> = vec![("running example".into(), validate(&running_example()))];
    clean.extend(CLEAN_FIXTURES.iter().map(|n| (n.to_string(), diagnose(&fixtures().join(n)))));
    for (name, found) in clean {
        let hit: Vec<Code> = found.iter().map(|d| d.code).filter(|c| CATALOG.contains(c)).collect();
        ensure(hit.is_empty(), || format!("clean {name} yields {hit:?}"))?;
    }
    Ok(format!("{} codes covered, {} clean inputs silent", CATALOG.len(), CLEAN_FIXTURES.len() + 1))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("running example reconstruction", running_example_reconstruction),
        ("lossless round trip", lossless_round_trip),
        ("requirement suite", requirement_suite),
        ("parser fixtures", parser_fixtures),
        ("streaming equivalence", streaming_equivalence),
        ("validator catalog coverage", catalog_coverage),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: pass  {name} ({detail})", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", n + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
