//! The manufacturing running example: a flow sensor on a tank, peak
//! detection over its observations, and a "Take sample" process event
//! derived from three peaks.
//!
//! Wall-clock times follow the published fragment; the calendar date
//! ([`DAY`]) is arbitrary.

use std::collections::BTreeMap;

use chrono::{NaiveDate, TimeZone, Utc};

use crate::model::{CoreEvent, CoreLog, CoreObject, EventDraft, Identifier, LinkDirection, ObjectClass, ObjectObjectRel, Timestamp};

pub const DAY: (i32, u32, u32) = (2024, 3, 11);

pub const BATCH: &str = "o1";
pub const SAMPLE_RULE: &str = "o2";
pub const PEAK_ANALYTICS: &str = "o3";
pub const FLOW_SENSOR: &str = "o4";
pub const TANK: &str = "o5";
pub const MES: &str = "o6";

pub const FILTERING: &str = "e1";
pub const FIRST_PEAKS: [&str; 2] = ["e7400", "e7411"];
pub const PEAK: &str = "e7556";
pub const TAKE_SAMPLE: &str = "e7557";

/// Time of day on [`DAY`].
pub fn at(hour: u32, minute: u32, second: u32, milli: u32) -> Timestamp {
    let (y, m, d) = DAY;
    let naive = NaiveDate::from_ymd_opt(y, m, d)
        .and_then(|date| date.and_hms_milli_opt(hour, minute, second, milli))
        .expect("valid wall-clock time");
    Timestamp::from_datetime(Utc.from_utc_datetime(&naive))
}

/// The span covered by the published fragment, 12:54:57 to 12:56:17.
pub fn fragment_window() -> (Timestamp, Timestamp) {
    (at(12, 54, 57, 0), at(12, 56, 17, 0))
}

fn id(raw: &str) -> Identifier {
    Identifier::new(raw).expect("example ids are valid")
}

fn eid(n: u32) -> Identifier {
    id(&format!("e{n}"))
}

/// Observations e7423..=e7555: three at one-second spacing, then 130 spread
/// evenly up to 12:56:15.
fn peak_window_observations() -> Vec<(u32, Timestamp, i64)> {
    let mut out = vec![
        (7423, at(12, 54, 57, 0), 206),
        (7424, at(12, 54, 58, 0), 206),
        (7425, at(12, 54, 59, 0), 207),
    ];
    let start = at(12, 54, 59, 0).unix_nanos().expect("in range") / 1_000_000;
    for k in 1..=130i64 {
        let millis = start + (76_000 * k + 65) / 130;
        let t = Timestamp::from_unix_millis(millis).expect("in range");
        // rises to a crest of 212 around the middle, back to 204 at the end
        let value = if k == 130 { 204 } else { 212 - (k - 65).abs() / 9 };
        out.push((7425 + k as u32, t, value));
    }
    out
}

pub fn running_example() -> CoreLog {
    let mut log = CoreLog::new(BTreeMap::from([("logging_strategy".to_string(), "batch".into())]));
    let analytics = |raw: &str, rule: &str| {
        CoreObject::new(id(raw), "Analytics", ObjectClass::Link(LinkDirection::BottomUp))
            .with_attribute("rule", Timestamp::UNIX_EPOCH, rule)
    };
    for obj in [
        CoreObject::new(id(BATCH), "Batch", ObjectClass::CaseObject),
        analytics(SAMPLE_RULE, "three consecutive peaks"),
        analytics(PEAK_ANALYTICS, "peak detection"),
        CoreObject::new(id(FLOW_SENSOR), "Flow sensor", ObjectClass::Sensor),
        CoreObject::new(id(TANK), "Tank", ObjectClass::ContextObject),
        CoreObject::new(id(MES), "MES", ObjectClass::InformationSystem),
    ] {
        log.add_object(obj).expect("fresh ids");
    }
    log.add_o2o(ObjectObjectRel::new(id(FLOW_SENSOR), id(TANK), "observes")).expect("both exist");

    log.add_event(
        CoreEvent::process(id(FILTERING), at(12, 34, 56, 0), "Filtering").with_attribute("lifecycle", "start"),
        &[(id(BATCH), "batch".into()), (id(TANK), "tank".into()), (id(MES), "recorded-by".into())],
    )
    .expect("valid process event");

    let observe = |log: &mut CoreLog, n: u32, t: Timestamp, value: i64| {
        log.add_event(
            CoreEvent::observation(eid(n), t).with_attribute("value", value),
            &[(id(FLOW_SENSOR), "made-by".into()), (id(TANK), "observes".into())],
        )
        .expect("valid observation");
        log.object_mut(TANK).expect("tank exists").set_attribute("flow", t, value);
    };
    let peak_link = log.object(PEAK_ANALYTICS).expect("exists").clone();
    let peak = |log: &mut CoreLog, n: u32, sources: &[Identifier]| {
        log.derive_event(
            peak_link.clone(),
            sources,
            EventDraft::iot(eid(n), "Peak detected").with_attribute("lifecycle", "complete"),
            &[(id(TANK), "tank".into())],
        )
        .expect("valid derivation");
    };

    // two earlier peaks, each over its own run of observations
    let mut first = Vec::new();
    for k in 0..20 {
        observe(&mut log, 7380 + k, at(12, 54, k, 0), 200 + i64::from(k % 4));
        first.push(eid(7380 + k));
    }
    peak(&mut log, 7400, &first);
    let mut second = Vec::new();
    for k in 0..10 {
        observe(&mut log, 7401 + k, at(12, 54, 20 + k, 0), 203 + i64::from(k % 3));
        second.push(eid(7401 + k));
    }
    peak(&mut log, 7411, &second);

    let window = peak_window_observations();
    for &(n, t, value) in &window {
        observe(&mut log, n, t, value);
    }
    let sources: Vec<_> = window.iter().filter(|(n, ..)| *n >= 7425).map(|(n, ..)| eid(*n)).collect();
    peak(&mut log, 7556, &sources);

    let sample_rule = log.object(SAMPLE_RULE).expect("exists").clone();
    log.derive_event(
        sample_rule,
        &[id(FIRST_PEAKS[0]), id(FIRST_PEAKS[1]), id(PEAK)],
        EventDraft::process(id(TAKE_SAMPLE), "Take sample").with_attribute("lifecycle", "complete"),
        &[(id(BATCH), "batch".into())],
    )
    .expect("valid derivation");

    observe(&mut log, 7558, at(12, 56, 16, 0), 204);
    observe(&mut log, 7559, at(12, 56, 17, 0), 202);
    log
}
