//! XES logs carrying the DataStream extension.
//!
//! An `<event>` with `concept:name` becomes a process event and the points of
//! its `stream:datastream` become observations linked to it. An `<event>`
//! without `concept:name` only groups points; its own attributes are copied
//! onto each of them. Each trace becomes a case object.

use std::collections::BTreeMap;

use super::xes::{flatten_into, split_children, timestamp, XesAttr, XesValue};
use super::xml::{parse_document, Element};
use super::{ident, synthesized_source, Builder, ParseError, ParseReport, CASE_QUALIFIER, SOURCE_QUALIFIER};
use crate::model::{
    AttributeValue, CoreEvent, CoreObject, EventEventRel, Identifier, ObjectClass, Timestamp, DERIVED_FROM,
};
use crate::validation::{Code, Diagnostic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataStreamProfile {
    /// Trier learning-factory logs: point attributes named after their
    /// semantic role (system, system_type, observation, ...).
    Trier,
    /// TUM machining logs: every (stream:name, stream:source) pair is a
    /// device.
    Tum,
}

impl DataStreamProfile {
    fn name(self) -> &'static str {
        match self {
            DataStreamProfile::Trier => "datastream-trier",
            DataStreamProfile::Tum => "datastream-tum",
        }
    }
}

const POINT: &str = "stream:point";
const MULTIPOINT: &str = "stream:multipoint";
const DATASTREAM: &str = "stream:datastream";
const DATACONTEXT: &str = "stream:datacontext";
const STREAM_NAME: &str = "stream:name";
const STREAM_SOURCE: &str = "stream:source";
const STREAM_TIMESTAMP: &str = "stream:timestamp";
const CONCEPT_NAME: &str = "concept:name";
const TIME: &str = "time:timestamp";
const IDENTITY: &str = "identity:id";
const RESOURCE: &str = "org:resource";

pub const DEVICE_TYPE: &str = "IoT-Device";
pub const RESOURCE_TYPE: &str = "resource";
pub(crate) const RESOURCE_QUALIFIER: &str = "resource";
pub(crate) const DEVICE_QUALIFIER: &str = "measured-by";

pub fn parse_datastream(bytes: &[u8], profile: DataStreamProfile) -> Result<ParseReport, ParseError> {
    let root = parse_document(bytes)?
        .ok_or_else(|| ParseError::MalformedXml { position: 0, message: "document has no root element".into() })?;
    if root.name != "log" {
        return Err(ParseError::schema("/", format!("root element is <{}>, expected <log>", root.name)));
    }
    let declares_stream = root.attributes.iter().any(|(k, _)| k == "xmlns:stream")
        || root.children_named("extension").any(|e| e.attr("prefix") == Some("stream"));
    let has_traces = root.children_named("trace").next().is_some();
    if has_traces && !declares_stream {
        return Err(ParseError::MissingExtension);
    }

    let mut p = DataStreamParser {
        profile,
        builder: Builder::new(),
        source: synthesized_source(bytes, profile.name()),
        source_used: false,
    };
    if !has_traces {
        p.builder.note(Diagnostic::log_level(Code::W005, "document holds no traces"));
    }

    let (attrs, others) = split_children(&root, "/log")?;
    let mut metadata = BTreeMap::new();
    flatten_into("", &attrs, &mut metadata);
    for (k, v) in metadata {
        p.builder.metadata(k, v);
    }
    let mut trace_index = 0;
    for el in others {
        match el.name.as_str() {
            "extension" => {
                if let (Some(prefix), Some(uri)) = (el.attr("prefix"), el.attr("uri")) {
                    p.builder.metadata(format!("xes:extension:{prefix}"), AttributeValue::Text(uri.to_string()));
                }
            }
            "trace" => {
                trace_index += 1;
                p.trace(el, trace_index)?;
            }
            other => p.builder.note(Diagnostic::log_level(Code::W006, format!("<{other}> element ignored"))),
        }
    }

    let DataStreamParser { mut builder, source, source_used, .. } = p;
    if source_used {
        builder.object(source);
    }
    Ok(builder.finish())
}

struct DataStreamParser {
    profile: DataStreamProfile,
    builder: Builder,
    source: CoreObject,
    source_used: bool,
}

/// A stream point with every inherited attribute resolved.
struct Point {
    attrs: BTreeMap<String, AttributeValue>,
}

/// Collects points below `items`. Scalars at a grouping level (datastream,
/// multipoint) apply to every point beneath it unless the point overrides
/// them.
fn gather_points(items: &[XesAttr], inherited: &BTreeMap<String, AttributeValue>, out: &mut Vec<Point>) {
    let mut scope = inherited.clone();
    let groups: Vec<&XesAttr> = items.iter().filter(|a| matches!(a.value, XesValue::List(_))).collect();
    for a in items {
        if let Some(v) = a.as_scalar() {
            scope.insert(a.key.clone(), v);
        }
    }
    for g in groups.iter().filter(|g| ![POINT, MULTIPOINT, DATASTREAM].contains(&g.key.as_str())) {
        flatten_into(&g.key, g.children(), &mut scope);
    }
    for g in groups {
        match g.key.as_str() {
            POINT => {
                let mut attrs = scope.clone();
                flatten_into("", g.children(), &mut attrs);
                out.push(Point { attrs });
            }
            MULTIPOINT | DATASTREAM => gather_points(g.children(), &scope, out),
            _ => {}
        }
    }
}

fn take_text(attrs: &mut BTreeMap<String, AttributeValue>, key: &str) -> Option<String> {
    attrs.remove(key).map(|v| match v {
        AttributeValue::Text(s) => s,
        other => other.to_json().to_string(),
    })
}

impl DataStreamParser {
    fn source_link(&mut self) -> (Identifier, String) {
        self.source_used = true;
        (self.source.object_id.clone(), SOURCE_QUALIFIER.into())
    }

    fn resource_link(&mut self, name: &str, path: &str) -> Result<(Identifier, String), ParseError> {
        let id = ident(name, path)?;
        self.builder.object_once(CoreObject::new(id.clone(), RESOURCE_TYPE, ObjectClass::Resource));
        Ok((id, RESOURCE_QUALIFIER.into()))
    }

    fn trace(&mut self, trace: &Element, index: usize) -> Result<(), ParseError> {
        let path = format!("/log/trace[{index}]");
        let (attrs, others) = split_children(trace, &path)?;
        let mut case_attrs = BTreeMap::new();
        let mut context = BTreeMap::new();
        let mut points = Vec::new();
        let mut case_name = None;
        for a in &attrs {
            match (a.key.as_str(), &a.value) {
                (CONCEPT_NAME, XesValue::Scalar(_)) => case_name = a.as_text(),
                (DATACONTEXT, XesValue::List(items)) => flatten_into("datacontext", items, &mut context),
                (DATASTREAM | POINT | MULTIPOINT, _) => gather_points(std::slice::from_ref(a), &BTreeMap::new(), &mut points),
                _ => flatten_into("", std::slice::from_ref(a), &mut case_attrs),
            }
        }
        let case_name = case_name.unwrap_or_else(|| format!("trace-{index}"));
        let case_id = ident(&case_name, &path)?;
        let mut case = CoreObject::new(case_id.clone(), "Case", ObjectClass::CaseObject);
        for (k, v) in case_attrs {
            case.set_attribute(k, Timestamp::UNIX_EPOCH, v);
        }
        self.builder.object(case);

        let events: Vec<&Element> = others.iter().copied().filter(|e| e.name == "event").collect();
        for el in others.iter().filter(|e| e.name != "event") {
            self.builder.note(Diagnostic::about(Code::W006, &case_id, format!("<{}> element ignored", el.name)));
        }
        if events.is_empty() && points.is_empty() {
            self.builder.note(Diagnostic::about(Code::W005, &case_id, "trace holds no events"));
        }
        let prefix = format!("t{index}");
        for (i, point) in points.into_iter().enumerate() {
            self.point(point, &format!("{prefix}p{}", i + 1), &case_id, None, &context, None, &path)?;
        }
        for (i, el) in events.into_iter().enumerate() {
            self.event(el, &format!("{prefix}e{}", i + 1), &case_id, &context, &format!("{path}/event[{}]", i + 1))?;
        }
        Ok(())
    }

    fn event(
        &mut self,
        el: &Element,
        default_id: &str,
        case_id: &Identifier,
        trace_context: &BTreeMap<String, AttributeValue>,
        path: &str,
    ) -> Result<(), ParseError> {
        let (attrs, others) = split_children(el, path)?;
        let mut own = BTreeMap::new();
        let mut context = trace_context.clone();
        let mut points = Vec::new();
        for a in &attrs {
            match (a.key.as_str(), &a.value) {
                (DATACONTEXT, XesValue::List(items)) => flatten_into("datacontext", items, &mut context),
                (DATASTREAM | POINT | MULTIPOINT, _) => gather_points(std::slice::from_ref(a), &BTreeMap::new(), &mut points),
                _ => flatten_into("", std::slice::from_ref(a), &mut own),
            }
        }
        let id = match take_text(&mut own, IDENTITY) {
            Some(raw) => ident(&raw, path)?,
            None => ident(default_id, path)?,
        };
        for el in others {
            self.builder.note(Diagnostic::about(Code::W006, &id, format!("<{}> element ignored", el.name)));
        }
        let time = match take_text(&mut own, TIME) {
            Some(raw) => match timestamp(&raw, &id, &mut self.builder) {
                Some(t) => Some(t),
                None => {
                    self.builder.skip(Some(Diagnostic::about(Code::W006, &id, format!("unparseable timestamp {raw:?}"))));
                    return Ok(());
                }
            },
            None => None,
        };

        let process = match take_text(&mut own, CONCEPT_NAME) {
            Some(activity) => match time {
                Some(t) => {
                    let mut links = vec![self.source_link(), (case_id.clone(), CASE_QUALIFIER.into())];
                    if let Some(resource) = take_text(&mut own, RESOURCE) {
                        links.push(self.resource_link(&resource, path)?);
                    }
                    let mut event = CoreEvent::process(id.clone(), t, activity);
                    event.attributes = own.clone();
                    event.attributes.extend(context.clone());
                    self.builder.event(event, links);
                    Some(id.clone())
                }
                None => {
                    self.builder.skip(Some(Diagnostic::about(Code::W006, &id, "process event without time:timestamp")));
                    None
                }
            },
            None if points.is_empty() => {
                self.builder.skip(Some(Diagnostic::about(Code::W006, &id, "event has neither concept:name nor stream points")));
                return Ok(());
            }
            None => {
                // a pure grouping element: its attributes travel with the points
                self.builder.bump("containers");
                for (k, v) in std::mem::take(&mut own) {
                    context.entry(k).or_insert(v);
                }
                None
            }
        };

        for (i, point) in points.into_iter().enumerate() {
            let point_id = format!("{id}p{}", i + 1);
            self.point(point, &point_id, case_id, process.as_ref(), &context, time, path)?;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn point(
        &mut self,
        point: Point,
        default_id: &str,
        case_id: &Identifier,
        parent: Option<&Identifier>,
        context: &BTreeMap<String, AttributeValue>,
        fallback: Option<Timestamp>,
        path: &str,
    ) -> Result<(), ParseError> {
        let mut attrs = point.attrs;
        let id = match take_text(&mut attrs, IDENTITY) {
            Some(raw) => ident(&raw, path)?,
            None => ident(default_id, path)?,
        };
        let raw_time = take_text(&mut attrs, STREAM_TIMESTAMP).or_else(|| take_text(&mut attrs, TIME));
        let time = match raw_time {
            Some(raw) => match timestamp(&raw, &id, &mut self.builder) {
                Some(t) => t,
                None => {
                    self.builder.skip(Some(Diagnostic::about(Code::W006, &id, format!("unparseable timestamp {raw:?}"))));
                    return Ok(());
                }
            },
            None => match fallback {
                Some(t) => t,
                None => {
                    self.builder.skip(Some(Diagnostic::about(Code::W006, &id, "stream point without timestamp")));
                    return Ok(());
                }
            },
        };

        let mut links = vec![self.source_link(), (case_id.clone(), CASE_QUALIFIER.into())];
        if let Some(activity) = take_text(&mut attrs, CONCEPT_NAME) {
            if let Some(resource) = take_text(&mut attrs, RESOURCE) {
                links.push(self.resource_link(&resource, path)?);
            }
            let mut event = CoreEvent::process(id, time, activity);
            event.attributes = strip_stream_prefix(attrs);
            for (k, v) in context {
                event.attributes.entry(k.clone()).or_insert_with(|| v.clone());
            }
            self.builder.event(event, links);
            return Ok(());
        }

        if self.profile == DataStreamProfile::Tum {
            let name = take_text(&mut attrs, STREAM_NAME);
            let source = take_text(&mut attrs, STREAM_SOURCE);
            if name.is_some() || source.is_some() {
                let device = format!("{}@{}", name.as_deref().unwrap_or(""), source.as_deref().unwrap_or(""));
                let device_id = ident(&device, path)?;
                let mut machine = CoreObject::new(device_id.clone(), DEVICE_TYPE, ObjectClass::Machine);
                if let Some(n) = name {
                    machine.set_attribute(STREAM_NAME, Timestamp::UNIX_EPOCH, n);
                }
                if let Some(s) = source {
                    machine.set_attribute(STREAM_SOURCE, Timestamp::UNIX_EPOCH, s);
                }
                self.builder.object_once(machine);
                links.push((device_id, DEVICE_QUALIFIER.into()));
            }
        }
        let mut event = CoreEvent::observation(id.clone(), time);
        event.attributes = strip_stream_prefix(attrs);
        for (k, v) in context {
            event.attributes.entry(k.clone()).or_insert_with(|| v.clone());
        }
        self.builder.event(event, links);
        if let Some(parent) = parent {
            self.builder.e2e(EventEventRel::new(id, parent.clone(), DERIVED_FROM));
        }
        Ok(())
    }
}

/// `stream:value` becomes `value` and so on, unless the short key is taken.
fn strip_stream_prefix(attrs: BTreeMap<String, AttributeValue>) -> BTreeMap<String, AttributeValue> {
    let mut out = BTreeMap::new();
    let (prefixed, plain): (Vec<_>, Vec<_>) = attrs.into_iter().partition(|(k, _)| k.starts_with("stream:"));
    out.extend(plain);
    for (k, v) in prefixed {
        let short = &k["stream:".len()..];
        if out.contains_key(short) {
            out.insert(k, v);
        } else {
            out.insert(short.to_string(), v);
        }
    }
    out
}
