mod support;

use std::collections::BTreeSet;

use corelog::running_example::running_example;
use corelog::validation::{validate, Code, Diagnostic};
use support::{diagnose, fixtures, trigger_fixture, CATALOG, CLEAN_FIXTURES};

fn codes(diagnostics: &[Diagnostic]) -> BTreeSet<Code> {
    diagnostics.iter().map(|d| d.code).collect()
}

#[test]
fn every_catalog_code_has_a_triggering_fixture() {
    for code in CATALOG {
        let path = trigger_fixture(code).unwrap_or_else(|| panic!("no fixture for {code}"));
        let found = diagnose(&path);
        assert!(codes(&found).contains(&code), "{} yields {:?}", path.display(), found);
    }
}

#[test]
fn clean_fixtures_trigger_no_catalog_code() {
    let mut clean = vec![("running example".to_string(), validate(&running_example()))];
    for name in CLEAN_FIXTURES {
        clean.push((name.to_string(), diagnose(&fixtures().join(name))));
    }
    for (name, found) in clean {
        let hit: Vec<_> = found.iter().filter(|d| CATALOG.contains(&d.code)).collect();
        assert!(hit.is_empty(), "{name}: {hit:?}");
    }
}
