//! Traversals over the event-to-event graph.
//!
//! Edges run from lower-level events to the higher-level events derived from
//! them, so ancestors are the evidence an event was abstracted from.

use std::collections::{BTreeMap, BTreeSet};

use super::{CoreLog, Identifier};

/// All events an event was (transitively) derived from.
pub fn ancestors(log: &CoreLog, event: &Identifier) -> BTreeSet<Identifier> {
    let mut incoming: BTreeMap<&Identifier, Vec<&Identifier>> = BTreeMap::new();
    for rel in log.e2e() {
        incoming.entry(&rel.target_event_id).or_default().push(&rel.source_event_id);
    }
    let mut found = BTreeSet::new();
    let mut stack = vec![event];
    while let Some(current) = stack.pop() {
        for &source in incoming.get(current).into_iter().flatten() {
            if found.insert(source.clone()) {
                stack.push(source);
            }
        }
    }
    found
}

/// All events (transitively) derived from an event.
pub fn descendants(log: &CoreLog, event: &Identifier) -> BTreeSet<Identifier> {
    let mut found = BTreeSet::new();
    let mut stack = vec![event.clone()];
    while let Some(current) = stack.pop() {
        for rel in log.e2e_from(&current) {
            if found.insert(rel.target_event_id.clone()) {
                stack.push(rel.target_event_id.clone());
            }
        }
    }
    found
}

/// Direct sources of an event.
pub fn sources(log: &CoreLog, event: &Identifier) -> BTreeSet<Identifier> {
    log.e2e()
        .iter()
        .filter(|r| &r.target_event_id == event)
        .map(|r| r.source_event_id.clone())
        .collect()
}

/// Kahn's algorithm over the e2e graph restricted to known events.
///
/// Returns the events in a topological order, or the events left over when
/// the graph has a cycle.
pub fn topological_order(log: &CoreLog) -> Result<Vec<Identifier>, BTreeSet<Identifier>> {
    let mut indegree: BTreeMap<&Identifier, usize> = log.events().keys().map(|k| (k, 0)).collect();
    for rel in log.e2e() {
        if log.event(rel.source_event_id.as_str()).is_some() {
            if let Some(d) = indegree.get_mut(&rel.target_event_id) {
                *d += 1;
            }
        }
    }
    let mut ready: Vec<&Identifier> =
        indegree.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(next) = ready.pop() {
        order.push(next.clone());
        for rel in log.e2e_from(next) {
            if let Some(d) = indegree.get_mut(&rel.target_event_id) {
                *d -= 1;
                if *d == 0 {
                    ready.push(&rel.target_event_id);
                }
            }
        }
    }
    if order.len() == indegree.len() {
        Ok(order)
    } else {
        let placed: BTreeSet<_> = order.into_iter().collect();
        Err(log.events().keys().filter(|k| !placed.contains(*k)).cloned().collect())
    }
}

/// Strongly connected components that form cycles (size > 1, or a self loop).
///
/// Each component is returned as a sorted set; components are sorted by
/// their smallest member.
pub fn cycles(log: &CoreLog) -> Vec<BTreeSet<Identifier>> {
    let nodes: Vec<&Identifier> = log.events().keys().collect();
    let index_of: BTreeMap<&Identifier, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut adjacency = vec![Vec::new(); nodes.len()];
    let mut self_loops = BTreeSet::new();
    for rel in log.e2e() {
        if let (Some(&s), Some(&t)) = (index_of.get(&rel.source_event_id), index_of.get(&rel.target_event_id)) {
            adjacency[s].push(t);
            if s == t {
                self_loops.insert(s);
            }
        }
    }

    // iterative Tarjan
    let n = nodes.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut components = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut child)) = work.last_mut() {
            if *child == 0 && index[v] == usize::MAX {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *child < adjacency[v].len() {
                let w = adjacency[v][*child];
                *child += 1;
                if index[w] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = BTreeSet::new();
                loop {
                    let w = stack.pop().expect("tarjan stack holds v");
                    on_stack[w] = false;
                    component.insert(w);
                    if w == v {
                        break;
                    }
                }
                if component.len() > 1 || self_loops.contains(&v) {
                    components.push(component.into_iter().map(|i| nodes[i].clone()).collect::<BTreeSet<_>>());
                }
            }
        }
    }
    components.sort();
    components
}
