//! Summary counts over a log, optionally restricted to a time window.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::model::{CoreLog, EventClass, LinkDirection, ObjectClass, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogStats {
    /// Every event class, zeros included.
    pub events_by_class: BTreeMap<String, usize>,
    /// Every fixed object class plus any `general.other:*` labels present.
    pub objects_by_class: BTreeMap<String, usize>,
    pub e2o: usize,
    pub o2o: usize,
    pub e2e: usize,
    pub first_timestamp: Option<Timestamp>,
    pub last_timestamp: Option<Timestamp>,
    /// Most frequent event types, ties broken by name.
    pub top_event_types: Vec<(String, usize)>,
}

/// Events (and the e2o/e2e relations they take part in) are counted only if
/// their timestamp lies inside the inclusive window; objects and o2o always.
pub fn compute(log: &CoreLog, window: Option<(Timestamp, Timestamp)>, top_k: usize) -> LogStats {
    let inside = |t: Timestamp| window.is_none_or(|(from, to)| from <= t && t <= to);
    let mut events_by_class: BTreeMap<String, usize> = EventClass::ALL.iter().map(|c| (c.to_string(), 0)).collect();
    let fixed = [
        ObjectClass::Sensor,
        ObjectClass::InformationSystem,
        ObjectClass::Link(LinkDirection::BottomUp),
        ObjectClass::Link(LinkDirection::TopDown),
        ObjectClass::CaseObject,
        ObjectClass::ContextObject,
        ObjectClass::Activity,
        ObjectClass::Subprocess,
        ObjectClass::Resource,
        ObjectClass::Machine,
    ];
    let mut objects_by_class: BTreeMap<String, usize> = fixed.iter().map(|c| (c.to_string(), 0)).collect();
    for obj in log.objects().values() {
        *objects_by_class.entry(obj.object_class.to_string()).or_default() += 1;
    }

    let mut types: BTreeMap<&str, usize> = BTreeMap::new();
    let (mut first, mut last): (Option<Timestamp>, Option<Timestamp>) = (None, None);
    let mut e2o = 0;
    for (id, ev) in log.events() {
        if !inside(ev.timestamp) {
            continue;
        }
        *events_by_class.entry(ev.event_class.to_string()).or_default() += 1;
        *types.entry(&ev.event_type).or_default() += 1;
        first = Some(first.map_or(ev.timestamp, |f| f.min(ev.timestamp)));
        last = Some(last.map_or(ev.timestamp, |l| l.max(ev.timestamp)));
        e2o += log.e2o_of(id).count();
    }
    let e2e = log
        .e2e()
        .iter()
        .filter(|r| log.event(r.target_event_id.as_str()).is_some_and(|e| inside(e.timestamp)))
        .count();

    let mut top: Vec<(String, usize)> = types.into_iter().map(|(t, n)| (t.to_string(), n)).collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top.truncate(top_k);

    LogStats {
        events_by_class,
        objects_by_class,
        e2o,
        o2o: log.o2o().len(),
        e2e,
        first_timestamp: first,
        last_timestamp: last,
        top_event_types: top,
    }
}

impl LogStats {
    pub fn events(&self) -> usize {
        self.events_by_class.values().sum()
    }

    pub fn objects(&self) -> usize {
        self.objects_by_class.values().sum()
    }

    pub fn event_count(&self, class: EventClass) -> usize {
        self.events_by_class.get(class.as_str()).copied().unwrap_or(0)
    }
}

impl fmt::Display for LogStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "events {}", self.events())?;
        for (class, n) in &self.events_by_class {
            writeln!(out, "  {class} {n}")?;
        }
        writeln!(out, "objects {}", self.objects())?;
        for (class, n) in &self.objects_by_class {
            writeln!(out, "  {class} {n}")?;
        }
        writeln!(out, "relations e2o {} o2o {} e2e {}", self.e2o, self.o2o, self.e2e)?;
        match (self.first_timestamp, self.last_timestamp) {
            (Some(a), Some(b)) => writeln!(out, "span {a} .. {b}")?,
            _ => writeln!(out, "span -")?,
        }
        writeln!(out, "top event types")?;
        for (t, n) in &self.top_event_types {
            writeln!(out, "  {t} {n}")?;
        }
        f.write_str(&out)
    }
}
