use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use super::CoreLog;

/// Path of the first record where two logs differ, e.g.
/// `events/e7/attributes/value`, or `None` when they are equal.
pub fn first_divergence(left: &CoreLog, right: &CoreLog) -> Option<String> {
    if let Some(key) = map_divergence(left.metadata(), right.metadata()) {
        return Some(format!("metadata/{key}"));
    }
    let object_ids = union_keys(left.objects(), right.objects());
    for id in object_ids {
        let (Some(a), Some(b)) = (left.object(id.as_str()), right.object(id.as_str())) else {
            return Some(format!("objects/{id}"));
        };
        if a.object_type != b.object_type {
            return Some(format!("objects/{id}/object_type"));
        }
        if a.object_class != b.object_class {
            return Some(format!("objects/{id}/object_class"));
        }
        if let Some(key) = map_divergence(&a.attributes, &b.attributes) {
            return Some(format!("objects/{id}/attributes/{key}"));
        }
    }
    let event_ids = union_keys(left.events(), right.events());
    for id in event_ids {
        let (Some(a), Some(b)) = (left.event(id.as_str()), right.event(id.as_str())) else {
            return Some(format!("events/{id}"));
        };
        let fields: [(&str, bool); 4] = [
            ("timestamp", a.timestamp == b.timestamp),
            ("event_class", a.event_class == b.event_class),
            ("event_type", a.event_type == b.event_type),
            ("activity", a.activity == b.activity),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, same)| !same) {
            return Some(format!("events/{id}/{name}"));
        }
        if let Some(key) = map_divergence(&a.attributes, &b.attributes) {
            return Some(format!("events/{id}/attributes/{key}"));
        }
    }
    if let Some(r) = set_divergence(left.e2o(), right.e2o()) {
        return Some(format!("e2o/{}/{}/{}", r.event_id, r.object_id, r.qualifier));
    }
    if let Some(r) = set_divergence(left.o2o(), right.o2o()) {
        return Some(format!("o2o/{}/{}/{}", r.source_id, r.target_id, r.qualifier));
    }
    if let Some(r) = set_divergence(left.e2e(), right.e2e()) {
        return Some(format!("e2e/{}/{}/{}", r.source_event_id, r.target_event_id, r.qualifier));
    }
    None
}

fn union_keys<'a, K: Ord, V>(a: &'a BTreeMap<K, V>, b: &'a BTreeMap<K, V>) -> BTreeSet<&'a K> {
    a.keys().chain(b.keys()).collect()
}

fn map_divergence<'a, V: PartialEq>(a: &'a BTreeMap<String, V>, b: &'a BTreeMap<String, V>) -> Option<&'a str> {
    union_keys(a, b).into_iter().find(|k| a.get(*k) != b.get(*k)).map(String::as_str)
}

fn set_divergence<'a, T: Ord + Debug>(a: &'a BTreeSet<T>, b: &'a BTreeSet<T>) -> Option<&'a T> {
    a.symmetric_difference(b).next()
}
