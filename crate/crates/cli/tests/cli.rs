use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use corelog::model::{CoreLog, EventEventRel, Identifier};
use corelog::ocel::{read_json, to_ocel, write_json, write_relational, DirBundle};
use corelog::running_example::running_example;
use corelog::stats;
use corelog::validation::report::read_structured;
use corelog::validation::Code;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn corelog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corelog")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_example(dir: &TempDir, log: &CoreLog) -> PathBuf {
    let target = dir.path().join("log.ocel.json");
    let mut bytes = Vec::new();
    write_json(&to_ocel(log).unwrap(), &mut bytes).unwrap();
    fs::write(&target, bytes).unwrap();
    target
}

#[test]
fn converts_nice_to_ocel_json() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("home.json");
    let run = corelog(&["convert", "--input", path(&fixture("nice_smart_home.xml")), "--from", "nice", "--to", "ocel-json", "--output", path(&out)]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let (doc, _) = read_json(fs::read(&out).unwrap().as_slice()).unwrap();
    assert!(!doc.events.is_empty());
    assert!(stderr(&run).contains("counts "));
}

#[test]
fn strict_convert_with_dangling_reference_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.json");
    let input = fixture("diagnostics/e005.nice.xml");
    let run = corelog(&["convert", "--input", path(&input), "--from", "nice", "--to", "ocel-json", "--output", path(&out), "--strict"]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("E005"));
    assert!(!out.exists());

    let lenient = corelog(&["convert", "--input", path(&input), "--from", "nice", "--to", "ocel-json", "--output", path(&out)]);
    assert_eq!(code(&lenient), 0);
    assert!(out.exists());
}

#[test]
fn ocel_json_to_csv_matches_direct_relational_write() {
    let dir = TempDir::new().unwrap();
    let input = write_example(&dir, &running_example());
    let via_cli = dir.path().join("cli");
    let run = corelog(&["convert", "--input", path(&input), "--from", "ocel-json", "--to", "ocel-csv", "--output", path(&via_cli)]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));

    let direct = dir.path().join("direct");
    fs::create_dir(&direct).unwrap();
    let (doc, _) = read_json(fs::read(&input).unwrap().as_slice()).unwrap();
    write_relational(&doc, &mut DirBundle::new(&direct)).unwrap();
    let mut names: Vec<_> = fs::read_dir(&direct).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        assert_eq!(fs::read(via_cli.join(&name)).unwrap(), fs::read(direct.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let clean = write_example(&dir, &running_example());
    assert_eq!(code(&corelog(&["validate", "--input", path(&clean), "--from", "ocel-json"])), 0);

    let bad = corelog(&["validate", "--input", path(&fixture("diagnostics/e006.ocel.json")), "--from", "ocel-json"]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("E006"));

    let warn = fixture("diagnostics/w002.nice.xml");
    assert_eq!(code(&corelog(&["validate", "--input", path(&warn), "--from", "nice"])), 0);
    assert_eq!(code(&corelog(&["validate", "--input", path(&warn), "--from", "nice", "--strict-warnings"])), 3);
}

#[test]
fn unreadable_input_and_usage_errors_exit_one() {
    assert_eq!(code(&corelog(&["validate", "--input", "/nonexistent/x.xml", "--from", "nice"])), 1);
    assert_eq!(code(&corelog(&["validate", "--from", "nice"])), 1);
    assert_eq!(code(&corelog(&["validate", "--input", "x", "--from", "custom"])), 1);
    assert_eq!(code(&corelog(&["--help"])), 0);
}

#[test]
fn structured_report_reads_back() {
    let run = corelog(&["validate", "--input", path(&fixture("diagnostics/e005.nice.xml")), "--from", "nice", "--report", "structured"]);
    assert_eq!(code(&run), 2);
    let found = read_structured(run.stderr.as_slice()).unwrap();
    assert!(found.iter().any(|d| d.code == Code::E005), "{found:?}");
}

#[test]
fn stats_match_library_and_survive_round_trip() {
    let dir = TempDir::new().unwrap();
    let log = running_example();
    let input = write_example(&dir, &log);
    let run = corelog(&["stats", "--input", path(&input), "--from", "ocel-json", "--report", "structured"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let printed: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    let expected = serde_json::to_value(stats::compute(&log, None, 10)).unwrap();
    assert_eq!(printed, expected);

    let csv = dir.path().join("csv");
    assert_eq!(code(&corelog(&["convert", "--input", path(&input), "--from", "ocel-json", "--to", "ocel-csv", "--output", path(&csv)])), 0);
    let again = corelog(&["stats", "--input", path(&csv), "--from", "ocel-csv", "--report", "structured"]);
    assert_eq!(run.stdout, again.stdout);
}

#[test]
fn stats_on_an_empty_log() {
    let dir = TempDir::new().unwrap();
    let input = write_example(&dir, &CoreLog::default());
    let run = corelog(&["stats", "--input", path(&input), "--from", "ocel-json"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert!(String::from_utf8_lossy(&run.stdout).contains("events 0"));
}

#[test]
fn roundtrip_check_passes_and_reports_a_corrupted_link() {
    let dir = TempDir::new().unwrap();
    let input = write_example(&dir, &running_example());
    for to in ["ocel-json", "ocel-csv"] {
        let run = corelog(&["roundtrip-check", "--input", path(&input), "--from", "ocel-json", "--to", to]);
        assert_eq!(code(&run), 0, "{to}: {}", stderr(&run));
    }

    // an e2e link object missing its target row no longer decodes
    let mut doc: serde_json::Value = serde_json::from_slice(&fs::read(&input).unwrap()).unwrap();
    for ev in doc["events"].as_array_mut().unwrap() {
        if let Some(rels) = ev["relationships"].as_array_mut() {
            rels.retain(|r| r["qualifier"] != "core:e2e:target");
        }
    }
    let corrupt = dir.path().join("corrupt.json");
    fs::write(&corrupt, serde_json::to_vec(&doc).unwrap()).unwrap();
    let run = corelog(&["roundtrip-check", "--input", path(&corrupt), "--from", "ocel-json"]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("mismatch"), "{}", stderr(&run));
}

#[test]
fn plain_ocel_round_trips() {
    let dir = TempDir::new().unwrap();
    let plain = serde_json::json!({
        "objectTypes": [{"name": "Order", "attributes": []}],
        "eventTypes": [{"name": "Place", "attributes": []}],
        "objects": [{"id": "o1", "type": "Order"}],
        "events": [{"id": "e1", "type": "Place", "time": "2024-01-01T00:00:00Z",
                    "relationships": [{"objectId": "o1", "qualifier": "order"}]}]
    });
    let input = dir.path().join("plain.json");
    fs::write(&input, serde_json::to_vec(&plain).unwrap()).unwrap();
    let run = corelog(&["roundtrip-check", "--input", path(&input), "--from", "ocel-json"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
}

#[test]
fn spilling_convert_matches_in_memory_convert() {
    let dir = TempDir::new().unwrap();
    let mut log = running_example();
    // one more e2e edge so relations cross segment boundaries
    let events: Vec<Identifier> = log.events_in_order().iter().map(|e| e.event_id.clone()).collect();
    let _ = log.add_e2e(EventEventRel::new(events[0].clone(), events[events.len() - 1].clone(), "follows"));
    let input = write_example(&dir, &log);
    let plain = dir.path().join("plain.json");
    let run = corelog(&["convert", "--input", path(&input), "--from", "ocel-json", "--to", "ocel-json", "--output", path(&plain)]);
    assert_eq!(code(&run), 0);

    let segments = dir.path().join("segments");
    for n in ["1", "7", "100000"] {
        let spilled = dir.path().join(format!("spilled-{n}.json"));
        let run = Command::new(env!("CARGO_BIN_EXE_corelog"))
            .env("CORELOG_SEGMENT_DIR", &segments)
            .args(["convert", "--input", path(&input), "--from", "ocel-json", "--to", "ocel-json"])
            .args(["--output", path(&spilled), "--spill-records", n])
            .output()
            .unwrap();
        assert_eq!(code(&run), 0, "{}", stderr(&run));
        assert!(stderr(&run).contains("segments="));
        assert_eq!(fs::read(&spilled).unwrap(), fs::read(&plain).unwrap(), "threshold {n}");
    }
    // scratch directories are removed
    assert_eq!(fs::read_dir(&segments).unwrap().count(), 0);
    assert_eq!(code(&corelog(&["convert", "--input", path(&input), "--from", "ocel-json", "--to", "ocel-json", "--output", path(&plain), "--spill-records", "0"])), 1);
}
