//! Structural checks of a [`CoreLog`] against the metamodel rules.
//!
//! Validation never repairs anything: it reads a snapshot and reports.

mod diagnostic;
pub mod report;

use std::collections::BTreeSet;

pub use diagnostic::{Code, Diagnostic, Severity};

use crate::model::{lineage, CoreLog, EventClass, OBSERVED};

/// Runs every structural rule and returns the findings sorted by
/// (severity, code, subject).
pub fn validate(log: &CoreLog) -> Vec<Diagnostic> {
    let mut found = BTreeSet::new();

    for (id, ev) in log.events() {
        match ev.event_class {
            EventClass::Observation if ev.event_type != OBSERVED => {
                found.insert(Diagnostic::about(
                    Code::E006,
                    id,
                    format!("observation has event_type {:?}, expected \"observed\"", ev.event_type),
                ));
            }
            EventClass::ProcessEvent => match ev.activity.as_deref() {
                None | Some("") => {
                    found.insert(Diagnostic::about(Code::E007, id, "process event has no activity"));
                }
                Some(activity) if activity != ev.event_type => {
                    found.insert(Diagnostic::about(
                        Code::E007,
                        id,
                        format!("event_type {:?} differs from activity {activity:?}", ev.event_type),
                    ));
                }
                Some(_) => {}
            },
            _ => {}
        }

        let mut data_sources = BTreeSet::new();
        let mut business = 0usize;
        for rel in log.e2o_of(id) {
            let Some(obj) = log.object(rel.object_id.as_str()) else { continue };
            if obj.object_class.is_data_source() {
                data_sources.insert(&rel.object_id);
            } else if obj.object_class.is_business() {
                business += 1;
            }
        }
        match data_sources.len() {
            0 => {
                found.insert(Diagnostic::about(Code::E002, id, "event has no data source"));
            }
            1 => {}
            n => {
                let names: Vec<_> = data_sources.iter().map(|d| d.as_str()).collect();
                found.insert(Diagnostic::about(
                    Code::E003,
                    id,
                    format!("event has {n} data sources: {}", names.join(", ")),
                ));
            }
        }
        if business == 0 {
            found.insert(Diagnostic::about(Code::E004, id, "event has no business object"));
        }
    }

    for rel in log.e2o() {
        if log.event(rel.event_id.as_str()).is_none() {
            found.insert(Diagnostic::about(Code::E005, &rel.event_id, "e2o relation from unknown event"));
        }
        if log.object(rel.object_id.as_str()).is_none() {
            found.insert(Diagnostic::about(
                Code::E005,
                &rel.event_id,
                format!("e2o relation to unknown object {}", rel.object_id),
            ));
        }
    }
    for rel in log.o2o() {
        for (end, role) in [(&rel.source_id, "source"), (&rel.target_id, "target")] {
            if log.object(end.as_str()).is_none() {
                found.insert(Diagnostic::about(
                    Code::E005,
                    &rel.source_id,
                    format!("o2o relation with unknown {role} object {end}"),
                ));
            }
        }
    }
    for rel in log.e2e() {
        for (end, role) in [(&rel.source_event_id, "source"), (&rel.target_event_id, "target")] {
            if log.event(end.as_str()).is_none() {
                found.insert(Diagnostic::about(
                    Code::E005,
                    &rel.source_event_id,
                    format!("e2e relation with unknown {role} event {end}"),
                ));
            }
        }
    }

    for cycle in lineage::cycles(log) {
        let first = cycle.iter().next().expect("cycles are non-empty");
        let members: Vec<_> = cycle.iter().map(|m| m.as_str()).collect();
        found.insert(Diagnostic::about(
            Code::E008,
            first,
            format!("e2e cycle through {}", members.join(", ")),
        ));
    }

    let mut early = BTreeSet::new();
    for rel in log.e2e() {
        let (Some(source), Some(target)) =
            (log.event(rel.source_event_id.as_str()), log.event(rel.target_event_id.as_str()))
        else {
            continue;
        };
        if target.timestamp < source.timestamp && early.insert(&rel.target_event_id) {
            found.insert(Diagnostic::about(
                Code::W001,
                &rel.target_event_id,
                format!("derived event precedes its source {}", rel.source_event_id),
            ));
        }
    }

    found.into_iter().collect()
}

/// True iff [`validate`] reports no error-severity diagnostic.
pub fn is_strictly_valid(log: &CoreLog) -> bool {
    !validate(log).iter().any(Diagnostic::is_error)
}

/// Sorts and removes exact duplicates.
pub fn normalize(diagnostics: &mut Vec<Diagnostic>) {
    diagnostics.sort();
    diagnostics.dedup();
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::id;
    use crate::model::{
        CoreEvent, CoreObject, EventDraft, EventEventRel, EventObjectRel, LinkDirection, ObjectClass,
        ObjectObjectRel, Timestamp,
    };

    fn ts(secs: i64) -> Timestamp {
        Timestamp::from_unix_millis(secs * 1000).unwrap()
    }

    fn objects() -> Vec<CoreObject> {
        vec![
            CoreObject::new(id!("s1"), "Flow sensor", ObjectClass::Sensor),
            CoreObject::new(id!("s2"), "Flow sensor", ObjectClass::Sensor),
            CoreObject::new(id!("tank"), "Tank", ObjectClass::ContextObject),
            CoreObject::new(id!("mach"), "Mill", ObjectClass::Machine),
        ]
    }

    fn codes(log: &CoreLog) -> Vec<Code> {
        validate(log).into_iter().map(|d| d.code).collect()
    }

    fn e2o(e: &str, o: &str) -> EventObjectRel {
        EventObjectRel::new(id!(e), id!(o), "q")
    }

    #[test]
    fn empty_log_is_valid() {
        assert!(validate(&CoreLog::default()).is_empty());
        assert!(is_strictly_valid(&CoreLog::default()));
    }

    #[test]
    fn data_source_and_business_cardinality() {
        let events = [CoreEvent::observation(id!("a"), ts(0))];
        let two_sources = CoreLog::from_parts(
            objects(),
            events.clone(),
            [e2o("a", "s1"), e2o("a", "s2"), e2o("a", "tank")],
            [],
            [],
            BTreeMap::new(),
        );
        assert_eq!(codes(&two_sources), vec![Code::E003]);

        let none = CoreLog::from_parts(objects(), events.clone(), [e2o("a", "tank")], [], [], BTreeMap::new());
        assert_eq!(codes(&none), vec![Code::E002]);

        // a general object does not count as business
        let general = CoreLog::from_parts(objects(), events, [e2o("a", "s1"), e2o("a", "mach")], [], [], BTreeMap::new());
        assert_eq!(codes(&general), vec![Code::E004]);
    }

    #[test]
    fn typing_rules() {
        let mut reading = CoreEvent::observation(id!("a"), ts(0));
        reading.event_type = "reading".into();
        let mut no_activity = CoreEvent::process(id!("b"), ts(0), "Take sample");
        no_activity.activity = None;
        let mut renamed = CoreEvent::process(id!("c"), ts(0), "Take sample");
        renamed.event_type = "Sample taken".into();
        let links = ["a", "b", "c"].into_iter().flat_map(|e| [e2o(e, "s1"), e2o(e, "tank")]);
        let log = CoreLog::from_parts(objects(), [reading, no_activity, renamed], links, [], [], BTreeMap::new());
        let found = validate(&log);
        assert_eq!(found.iter().map(|d| d.code).collect::<Vec<_>>(), vec![Code::E006, Code::E007, Code::E007]);
        assert_eq!(found[0].subject.as_deref(), Some("a"));
    }

    #[test]
    fn dangling_references_and_cycles() {
        let events = [CoreEvent::iot(id!("a"), ts(0), "p"), CoreEvent::iot(id!("b"), ts(1), "p")];
        let links = [e2o("a", "s1"), e2o("a", "tank"), e2o("b", "s1"), e2o("b", "tank")];
        let dangling = CoreLog::from_parts(
            objects(),
            events.clone(),
            links.iter().cloned().chain([e2o("a", "ghost")]),
            [ObjectObjectRel::new(id!("s1"), id!("nowhere"), "located-at")],
            [],
            BTreeMap::new(),
        );
        assert_eq!(codes(&dangling), vec![Code::E005, Code::E005]);

        let cyclic = CoreLog::from_parts(
            objects(),
            events,
            links,
            [],
            [EventEventRel::new(id!("a"), id!("b"), "d"), EventEventRel::new(id!("b"), id!("a"), "d")],
            BTreeMap::new(),
        );
        // the b -> a edge also points backwards in time
        assert_eq!(codes(&cyclic), vec![Code::E008, Code::W001]);
    }

    #[test]
    fn early_derivation_is_a_warning() {
        let mut log = CoreLog::default();
        for o in objects() {
            log.add_object(o).unwrap();
        }
        log.add_event(CoreEvent::observation(id!("o1"), ts(10)), &[(id!("s1"), "by".into()), (id!("tank"), "of".into())])
            .unwrap();
        let link = CoreObject::new(id!("l"), "Analytics", ObjectClass::Link(LinkDirection::BottomUp));
        log.derive_event(link, &[id!("o1")], EventDraft::iot(id!("peak"), "Peak").at(ts(5)), &[(id!("tank"), "of".into())])
            .unwrap();
        let found = validate(&log);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].code, Code::W001);
        assert_eq!(found[0].subject.as_deref(), Some("peak"));
        assert!(is_strictly_valid(&log));
    }

    #[test]
    fn output_is_sorted_errors_first() {
        let mut reading = CoreEvent::observation(id!("z"), ts(0));
        reading.event_type = "reading".into();
        let log = CoreLog::from_parts(objects(), [reading], [], [], [], BTreeMap::new());
        let found = validate(&log);
        let mut sorted = found.clone();
        sorted.sort();
        assert_eq!(found, sorted);
        assert_eq!(codes(&log), vec![Code::E002, Code::E004, Code::E006]);
    }
}
