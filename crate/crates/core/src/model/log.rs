use std::collections::{BTreeMap, BTreeSet};

use super::error::{
    AddEventError, ClassRuleViolation, DeriveError, DuplicateId, Namespace, RelError,
};
use super::record::{CoreEvent, CoreObject, EventDraft};
use super::relation::{
    EventEventRel, EventObjectRel, ObjectObjectRel, DERIVED_BY, DERIVED_FROM, SELF_QUALIFIER,
};
use super::{AttributeValue, EventClass, Identifier, LinkDirection, ObjectClass};

/// What to do when an inserted record reuses an existing id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OnDuplicate {
    /// Reject with [`DuplicateId`], leaving the log unchanged.
    #[default]
    Fail,
    /// Keep the first record and report the skipped one.
    Skip,
}

/// Result of an insertion under [`OnDuplicate::Skip`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Insertion {
    Inserted,
    Skipped(DuplicateId),
}

/// Root container of an IoT-enhanced event log.
///
/// All collections are ordered, so two logs holding the same records compare
/// equal regardless of insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoreLog {
    objects: BTreeMap<Identifier, CoreObject>,
    events: BTreeMap<Identifier, CoreEvent>,
    e2o: BTreeSet<EventObjectRel>,
    o2o: BTreeSet<ObjectObjectRel>,
    e2e: BTreeSet<EventEventRel>,
    metadata: BTreeMap<String, AttributeValue>,
}

impl CoreLog {
    pub fn new(metadata: BTreeMap<String, AttributeValue>) -> Self {
        Self { metadata, ..Self::default() }
    }

    /// Assembles a log without any rule checks.
    ///
    /// Later records win on id clashes. Used by decoders that must accept
    /// logs violating the typing rules so that validation can report them.
    pub fn from_parts(
        objects: impl IntoIterator<Item = CoreObject>,
        events: impl IntoIterator<Item = CoreEvent>,
        e2o: impl IntoIterator<Item = EventObjectRel>,
        o2o: impl IntoIterator<Item = ObjectObjectRel>,
        e2e: impl IntoIterator<Item = EventEventRel>,
        metadata: BTreeMap<String, AttributeValue>,
    ) -> Self {
        Self {
            objects: objects.into_iter().map(|o| (o.object_id.clone(), o)).collect(),
            events: events.into_iter().map(|e| (e.event_id.clone(), e)).collect(),
            e2o: e2o.into_iter().collect(),
            o2o: o2o.into_iter().collect(),
            e2e: e2e.into_iter().collect(),
            metadata,
        }
    }

    pub fn objects(&self) -> &BTreeMap<Identifier, CoreObject> {
        &self.objects
    }

    pub fn events(&self) -> &BTreeMap<Identifier, CoreEvent> {
        &self.events
    }

    pub fn e2o(&self) -> &BTreeSet<EventObjectRel> {
        &self.e2o
    }

    pub fn o2o(&self) -> &BTreeSet<ObjectObjectRel> {
        &self.o2o
    }

    pub fn e2e(&self) -> &BTreeSet<EventEventRel> {
        &self.e2e
    }

    pub fn metadata(&self) -> &BTreeMap<String, AttributeValue> {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut BTreeMap<String, AttributeValue> {
        &mut self.metadata
    }

    pub fn object(&self, id: &str) -> Option<&CoreObject> {
        self.objects.get(id)
    }

    pub fn object_mut(&mut self, id: &str) -> Option<&mut CoreObject> {
        self.objects.get_mut(id)
    }

    pub fn event(&self, id: &str) -> Option<&CoreEvent> {
        self.events.get(id)
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty() && self.events.is_empty()
    }

    /// Events ordered by (timestamp, event_id).
    pub fn events_in_order(&self) -> Vec<&CoreEvent> {
        let mut events: Vec<_> = self.events.values().collect();
        events.sort_by(|a, b| (a.timestamp, &a.event_id).cmp(&(b.timestamp, &b.event_id)));
        events
    }

    /// e2o relations of one event.
    pub fn e2o_of<'a>(&'a self, event_id: &'a Identifier) -> impl Iterator<Item = &'a EventObjectRel> + 'a {
        self.e2o
            .range(EventObjectRel::lower_bound(event_id)..)
            .take_while(move |r| &r.event_id == event_id)
    }

    /// o2o relations leaving one object.
    pub fn o2o_from<'a>(&'a self, object_id: &'a Identifier) -> impl Iterator<Item = &'a ObjectObjectRel> + 'a {
        self.o2o
            .range(ObjectObjectRel::lower_bound(object_id)..)
            .take_while(move |r| &r.source_id == object_id)
    }

    /// e2e relations leaving one event (towards higher-level events).
    pub fn e2e_from<'a>(&'a self, event_id: &'a Identifier) -> impl Iterator<Item = &'a EventEventRel> + 'a {
        self.e2e
            .range(EventEventRel::lower_bound(event_id)..)
            .take_while(move |r| &r.source_event_id == event_id)
    }

    pub fn add_object(&mut self, obj: CoreObject) -> Result<(), DuplicateId> {
        match self.insert_object(obj, OnDuplicate::Fail)? {
            Insertion::Inserted => Ok(()),
            Insertion::Skipped(dup) => Err(dup),
        }
    }

    pub fn insert_object(&mut self, obj: CoreObject, on_duplicate: OnDuplicate) -> Result<Insertion, DuplicateId> {
        if self.objects.contains_key(&obj.object_id) {
            let dup = DuplicateId { namespace: Namespace::Object, id: obj.object_id };
            return match on_duplicate {
                OnDuplicate::Fail => Err(dup),
                OnDuplicate::Skip => Ok(Insertion::Skipped(dup)),
            };
        }
        self.objects.insert(obj.object_id.clone(), obj);
        Ok(Insertion::Inserted)
    }

    /// Inserts an event together with its e2o relations.
    pub fn add_event(&mut self, ev: CoreEvent, links: &[(Identifier, String)]) -> Result<(), AddEventError> {
        match self.insert_event(ev, links, OnDuplicate::Fail)? {
            Insertion::Inserted => Ok(()),
            Insertion::Skipped(dup) => Err(dup.into()),
        }
    }

    pub fn insert_event(
        &mut self,
        ev: CoreEvent,
        links: &[(Identifier, String)],
        on_duplicate: OnDuplicate,
    ) -> Result<Insertion, AddEventError> {
        if self.events.contains_key(&ev.event_id) {
            let dup = DuplicateId { namespace: Namespace::Event, id: ev.event_id };
            return match on_duplicate {
                OnDuplicate::Fail => Err(dup.into()),
                OnDuplicate::Skip => Ok(Insertion::Skipped(dup)),
            };
        }
        ev.check_class_rules()?;
        if let Some((missing, _)) = links.iter().find(|(o, _)| !self.objects.contains_key(o)) {
            return Err(AddEventError::DanglingObjectRef(missing.clone()));
        }
        for (object_id, qualifier) in links {
            self.e2o.insert(EventObjectRel::new(ev.event_id.clone(), object_id.clone(), qualifier.clone()));
        }
        self.events.insert(ev.event_id.clone(), ev);
        Ok(Insertion::Inserted)
    }

    pub fn add_e2o(&mut self, rel: EventObjectRel) -> Result<(), RelError> {
        if !self.events.contains_key(&rel.event_id) {
            return Err(RelError::DanglingEventRef(rel.event_id));
        }
        if !self.objects.contains_key(&rel.object_id) {
            return Err(RelError::DanglingObjectRef(rel.object_id));
        }
        self.e2o.insert(rel);
        Ok(())
    }

    pub fn add_o2o(&mut self, rel: ObjectObjectRel) -> Result<(), RelError> {
        for end in [&rel.source_id, &rel.target_id] {
            if !self.objects.contains_key(end) {
                return Err(RelError::DanglingObjectRef(end.clone()));
            }
        }
        if rel.source_id == rel.target_id && rel.qualifier != SELF_QUALIFIER {
            return Err(RelError::SelfRelation(rel.source_id));
        }
        self.o2o.insert(rel);
        Ok(())
    }

    /// Inserts an e2e relation, refusing any edge that would close a cycle.
    pub fn add_e2e(&mut self, rel: EventEventRel) -> Result<(), RelError> {
        for end in [&rel.source_event_id, &rel.target_event_id] {
            if !self.events.contains_key(end) {
                return Err(RelError::DanglingEventRef(end.clone()));
            }
        }
        if rel.source_event_id == rel.target_event_id
            || self.reaches(&rel.target_event_id, &rel.source_event_id)
        {
            return Err(RelError::CycleDetected {
                source_event: rel.source_event_id,
                target: rel.target_event_id,
            });
        }
        self.e2e.insert(rel);
        Ok(())
    }

    /// True if `to` is reachable from `from` along e2e edges.
    pub fn reaches(&self, from: &Identifier, to: &Identifier) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(current) = stack.pop() {
            if current == to {
                return true;
            }
            if !seen.insert(current) {
                continue;
            }
            stack.extend(self.e2e_from(current).map(|r| &r.target_event_id));
        }
        false
    }

    /// Derives a higher-level event from `sources` through a link object.
    ///
    /// The link is inserted when absent. The new event gets one e2o edge to
    /// the link, one per business link, and one `derived-from` e2e edge from
    /// every source. A draft without timestamp takes the latest source
    /// timestamp.
    pub fn derive_event(
        &mut self,
        link: CoreObject,
        sources: &[Identifier],
        new_event: impl Into<EventDraft>,
        business_links: &[(Identifier, String)],
    ) -> Result<Identifier, DeriveError> {
        let draft = new_event.into();
        if sources.is_empty() {
            return Err(DeriveError::NoSources);
        }
        let link_class = match self.objects.get(&link.object_id) {
            Some(existing) => &existing.object_class,
            None => &link.object_class,
        };
        let direction = link_class
            .link_direction()
            .ok_or_else(|| ClassRuleViolation::NotALink { object: link.object_id.clone() })?;

        let mut latest = None;
        for source in sources {
            let ev = self
                .events
                .get(source)
                .ok_or_else(|| DeriveError::DanglingEventRef(source.clone()))?;
            let compatible = match direction {
                LinkDirection::BottomUp => {
                    matches!(draft.event_class, EventClass::IotEvent | EventClass::ProcessEvent)
                        && matches!(ev.event_class, EventClass::IotEvent | EventClass::Observation)
                }
                LinkDirection::TopDown => {
                    matches!(draft.event_class, EventClass::IotEvent | EventClass::Observation)
                        && ev.event_class == EventClass::ProcessEvent
                }
            };
            if !compatible {
                return Err(ClassRuleViolation::IncompatibleDirection {
                    direction,
                    target: draft.event_class,
                    source_event: source.clone(),
                    source_class: ev.event_class,
                }
                .into());
            }
            latest = latest.max(Some(ev.timestamp));
        }
        if let Some((missing, _)) = business_links
            .iter()
            .find(|(o, _)| !self.objects.contains_key(o) && *o != link.object_id)
        {
            return Err(DeriveError::DanglingObjectRef(missing.clone()));
        }
        if self.events.contains_key(&draft.event_id) {
            return Err(DuplicateId { namespace: Namespace::Event, id: draft.event_id }.into());
        }
        let event = draft.into_event(latest.expect("sources is non-empty"));
        event.check_class_rules()?;

        let event_id = event.event_id.clone();
        let link_id = link.object_id.clone();
        self.objects.entry(link_id.clone()).or_insert(link);
        let mut links = vec![(link_id, DERIVED_BY.to_string())];
        links.extend(business_links.iter().cloned());
        self.add_event(event, &links).expect("derivation preconditions checked");
        for source in sources {
            // the new event has no outgoing edges yet, so no cycle is possible
            self.e2e.insert(EventEventRel::new(source.clone(), event_id.clone(), DERIVED_FROM));
        }
        Ok(event_id)
    }

    /// Canonical form: empty e2o qualifiers take the event's event_type.
    ///
    /// Everything else is already canonical by construction, since every
    /// collection is kept ordered.
    pub fn canonicalize(&self) -> CoreLog {
        self.clone().into_canonical()
    }

    pub fn into_canonical(mut self) -> CoreLog {
        let needs_fill: Vec<_> = self.e2o.iter().filter(|r| r.qualifier.is_empty()).cloned().collect();
        for rel in needs_fill {
            if let Some(ev) = self.events.get(&rel.event_id) {
                let filled = EventObjectRel::new(rel.event_id.clone(), rel.object_id.clone(), ev.event_type.clone());
                self.e2o.remove(&rel);
                self.e2o.insert(filled);
            }
        }
        self
    }

    /// Data-source objects an event is related to.
    pub fn data_sources_of<'a>(&'a self, event_id: &'a Identifier) -> BTreeSet<&'a Identifier> {
        self.e2o_of(event_id)
            .filter(|r| self.objects.get(&r.object_id).is_some_and(|o| o.object_class.is_data_source()))
            .map(|r| &r.object_id)
            .collect()
    }

    /// Counts of events per class.
    pub fn count_events(&self, class: EventClass) -> usize {
        self.events.values().filter(|e| e.event_class == class).count()
    }

    pub fn count_objects_where(&self, pred: impl Fn(&ObjectClass) -> bool) -> usize {
        self.objects.values().filter(|o| pred(&o.object_class)).count()
    }
}
