//! NICE logs: lists of data sources, objects and events.
//!
//! Accepted dialect (element names are matched without namespace prefix):
//!
//! ```text
//! <eventLog>
//!   <dataSources>
//!     <sensor id=.. location=.. metadata=..>  <informationSystem id=..>  <analytics id=.. direction=..>
//!   </dataSources>
//!   <objects>
//!     <featureOfInterest id=.. type="location|date|user|..">  <digitalObject id=.. type=..>
//!   </objects>
//!   <events>
//!     <iotEvent id=.. timestamp=.. dataSource=.. label=..>
//!     <processEvent id=.. timestamp=.. dataSource=.. activity=.. lifecycle=..>
//!     <contextEvent id=.. timestamp=.. object=.. property=.. value=.. type=..>
//!   </events>
//! </eventLog>
//! ```
//!
//! Records may hold `<property name value type timestamp>` children; events
//! may hold `<objectRef ref qualifier>` and `<derivedFrom ref>`. Any other XML
//! attribute on a record is kept as a text attribute under its own name.

use super::xml::{parse_document, Element};
use super::{ident, Builder, ParseError, ParseReport};
use crate::model::{
    AttributeValue, CoreEvent, CoreObject, EventEventRel, Identifier, LinkDirection, ObjectClass, ObjectObjectRel,
    Timestamp, DERIVED_FROM,
};
use crate::validation::{Code, Diagnostic};

pub const LOCATED_AT: &str = "located-at";
pub const RECORDED_BY: &str = "recorded-by";
pub const DEFAULT_QUALIFIER: &str = "related";
pub const DEFAULT_IOT_LABEL: &str = "iot_event";

pub fn parse_nice(bytes: &[u8]) -> Result<ParseReport, ParseError> {
    let root = parse_document(bytes)?
        .ok_or_else(|| ParseError::MalformedXml { position: 0, message: "document has no root element".into() })?;
    if root.name != "eventLog" && root.name != "log" {
        return Err(ParseError::schema("/", format!("root element is <{}>, expected <eventLog>", root.name)));
    }
    let root_path = format!("/{}", root.name);
    let mut b = Builder::new();
    for (k, v) in &root.attributes {
        if !k.starts_with("xmlns") {
            b.metadata(k.clone(), AttributeValue::Text(v.clone()));
        }
    }
    let mut seen_records = false;
    for section in &root.children {
        let path = format!("{root_path}/{}", section.name);
        match section.name.as_str() {
            "dataSources" => data_sources(&mut b, section, &path)?,
            "objects" => objects(&mut b, section, &path)?,
            "events" => events(&mut b, section, &path)?,
            other => return Err(ParseError::schema(path, format!("unexpected section <{other}>"))),
        }
        seen_records |= !section.children.is_empty();
    }
    if !seen_records {
        b.note(Diagnostic::log_level(Code::W005, "document holds no records"));
    }
    Ok(b.finish())
}

fn required<'a>(el: &'a Element, key: &str, path: &str) -> Result<&'a str, ParseError> {
    el.attr(key).ok_or_else(|| ParseError::schema(path, format!("missing attribute {key:?}")))
}

fn typed_value(raw: &str, kind: Option<&str>, path: &str) -> Result<AttributeValue, ParseError> {
    let bad = |what: &str| ParseError::schema(path, format!("{raw:?} is not {what}"));
    Ok(match kind.unwrap_or("string") {
        "string" | "date" => AttributeValue::Text(raw.to_string()),
        "integer" | "int" | "long" => AttributeValue::Integer(raw.trim().parse().map_err(|_| bad("an integer"))?),
        "float" | "double" => {
            let f: f64 = raw.trim().parse().map_err(|_| bad("a number"))?;
            if f.is_finite() {
                AttributeValue::Real(f)
            } else {
                AttributeValue::Text(raw.to_string())
            }
        }
        "boolean" => match raw.trim() {
            "true" => AttributeValue::Boolean(true),
            "false" => AttributeValue::Boolean(false),
            _ => return Err(bad("a boolean")),
        },
        other => return Err(ParseError::schema(path, format!("unknown value type {other:?}"))),
    })
}

fn time(raw: &str, subject: &Identifier, b: &mut Builder, path: &str) -> Result<Timestamp, ParseError> {
    super::xes::timestamp(raw, subject, b).ok_or_else(|| ParseError::schema(path, format!("unreadable timestamp {raw:?}")))
}

/// `(name, at, value)` for each `<property>` child.
fn properties(
    el: &Element,
    subject: &Identifier,
    b: &mut Builder,
    path: &str,
) -> Result<Vec<(String, Option<Timestamp>, AttributeValue)>, ParseError> {
    let mut out = Vec::new();
    for (i, p) in el.children_named("property").enumerate() {
        let path = format!("{path}/property[{}]", i + 1);
        let name = required(p, "name", &path)?;
        let value = typed_value(required(p, "value", &path)?, p.attr("type"), &path)?;
        let at = p.attr("timestamp").map(|raw| time(raw, subject, b, &path)).transpose()?;
        out.push((name.to_string(), at, value));
    }
    Ok(out)
}

fn extra_attributes<'a>(el: &'a Element, consumed: &'a [&str]) -> impl Iterator<Item = (String, AttributeValue)> + 'a {
    el.attributes
        .iter()
        .filter(move |(k, _)| !consumed.contains(&k.as_str()) && !k.starts_with("xmlns"))
        .map(|(k, v)| (k.clone(), AttributeValue::Text(v.clone())))
}

fn check_children(el: &Element, allowed: &[&str], path: &str) -> Result<(), ParseError> {
    match el.children.iter().find(|c| !allowed.contains(&c.name.as_str())) {
        Some(c) => Err(ParseError::schema(path, format!("unexpected element <{}>", c.name))),
        None => Ok(()),
    }
}

fn object_record(
    b: &mut Builder,
    el: &Element,
    path: &str,
    object_type: &str,
    class: ObjectClass,
    consumed: &[&str],
) -> Result<CoreObject, ParseError> {
    check_children(el, &["property"], path)?;
    let id = ident(required(el, "id", path)?, path)?;
    let mut obj = CoreObject::new(id.clone(), object_type, class);
    for (k, v) in extra_attributes(el, consumed) {
        obj.set_attribute(k, Timestamp::UNIX_EPOCH, v);
    }
    for (name, at, value) in properties(el, &id, b, path)? {
        obj.set_attribute(name, at.unwrap_or(Timestamp::UNIX_EPOCH), value);
    }
    Ok(obj)
}

fn data_sources(b: &mut Builder, section: &Element, path: &str) -> Result<(), ParseError> {
    for (i, el) in section.children.iter().enumerate() {
        let path = format!("{path}/{}[{}]", el.name, i + 1);
        match el.name.as_str() {
            "sensor" => {
                let obj = object_record(b, el, &path, "Sensor", ObjectClass::Sensor, &["id"])?;
                if let Some(location) = el.attr("location") {
                    let target = ident(location, &path)?;
                    b.o2o(ObjectObjectRel::new(obj.object_id.clone(), target, LOCATED_AT));
                }
                b.object(obj);
            }
            "informationSystem" => {
                let obj = object_record(b, el, &path, "Information system", ObjectClass::InformationSystem, &["id"])?;
                b.object(obj);
            }
            "analytics" => {
                let direction = match el.attr("direction").unwrap_or("bottom_up").parse::<LinkDirection>() {
                    Ok(d) => d,
                    Err(e) => return Err(ParseError::schema(path, e.to_string())),
                };
                let obj =
                    object_record(b, el, &path, "Analytics", ObjectClass::Link(direction), &["id", "direction"])?;
                b.object(obj);
            }
            other => return Err(ParseError::schema(path, format!("unknown data source <{other}>"))),
        }
    }
    Ok(())
}

fn objects(b: &mut Builder, section: &Element, path: &str) -> Result<(), ParseError> {
    for (i, el) in section.children.iter().enumerate() {
        let path = format!("{path}/{}[{}]", el.name, i + 1);
        let obj = match el.name.as_str() {
            "featureOfInterest" => {
                let kind = required(el, "type", &path)?;
                let class = match kind {
                    "user" => ObjectClass::Resource,
                    _ => ObjectClass::ContextObject,
                };
                object_record(b, el, &path, kind, class, &["id", "type"])?
            }
            "digitalObject" => {
                let kind = el.attr("type").unwrap_or("digital object");
                object_record(b, el, &path, kind, ObjectClass::CaseObject, &["id", "type"])?
            }
            other => return Err(ParseError::schema(path, format!("unknown object kind <{other}>"))),
        };
        b.object(obj);
    }
    Ok(())
}

fn events(b: &mut Builder, section: &Element, path: &str) -> Result<(), ParseError> {
    for (i, el) in section.children.iter().enumerate() {
        let path = format!("{path}/{}[{}]", el.name, i + 1);
        match el.name.as_str() {
            "iotEvent" | "processEvent" => event(b, el, &path)?,
            "contextEvent" => context_event(b, el, &path)?,
            other => return Err(ParseError::schema(path, format!("unknown event kind <{other}>"))),
        }
    }
    Ok(())
}

fn event(b: &mut Builder, el: &Element, path: &str) -> Result<(), ParseError> {
    check_children(el, &["property", "objectRef", "derivedFrom"], path)?;
    let id = ident(required(el, "id", path)?, path)?;
    let at = time(required(el, "timestamp", path)?, &id, b, path)?;
    let props = properties(el, &id, b, path)?;
    let sources: Vec<Identifier> = el
        .children_named("derivedFrom")
        .map(|d| required(d, "ref", path).and_then(|r| ident(r, path)))
        .collect::<Result<_, _>>()?;

    let process = el.name == "processEvent";
    let consumed: &[&str] = if process {
        &["id", "timestamp", "dataSource", "activity"]
    } else if sources.is_empty() {
        &["id", "timestamp", "dataSource"]
    } else {
        &["id", "timestamp", "dataSource", "label"]
    };
    let mut ev = if process {
        let mut ev = CoreEvent::process(id.clone(), at, el.attr("activity").unwrap_or_default());
        // a missing activity is a source defect; the builder reports it
        if el.attr("activity").is_none_or(str::is_empty) {
            ev.activity = None;
        }
        ev
    } else if sources.is_empty() {
        CoreEvent::observation(id.clone(), at)
    } else {
        let label = el
            .attr("label")
            .map(str::to_string)
            .or_else(|| props.first().map(|(n, ..)| n.clone()))
            .unwrap_or_else(|| DEFAULT_IOT_LABEL.to_string());
        CoreEvent::iot(id.clone(), at, label)
    };
    ev.attributes.extend(extra_attributes(el, consumed));
    for (name, _, value) in props {
        ev.attributes.insert(name, value);
    }

    let mut links = Vec::new();
    if let Some(ds) = el.attr("dataSource") {
        links.push((ident(ds, path)?, RECORDED_BY.to_string()));
    }
    for r in el.children_named("objectRef") {
        let target = ident(required(r, "ref", path)?, path)?;
        links.push((target, r.attr("qualifier").unwrap_or(DEFAULT_QUALIFIER).to_string()));
    }
    for source in sources {
        b.e2e(EventEventRel::new(source, id.clone(), DERIVED_FROM));
    }
    b.event(ev, links);
    Ok(())
}

fn context_event(b: &mut Builder, el: &Element, path: &str) -> Result<(), ParseError> {
    check_children(el, &[], path)?;
    let id = ident(required(el, "id", path)?, path)?;
    let at = time(required(el, "timestamp", path)?, &id, b, path)?;
    let (Some(object), Some(property), Some(raw)) = (el.attr("object"), el.attr("property"), el.attr("value")) else {
        b.skip(Some(Diagnostic::about(Code::W006, &id, "context event dropped, no target object property")));
        return Ok(());
    };
    let value = typed_value(raw, el.attr("type"), path)?;
    b.update(id, ident(object, path)?, property.to_string(), at, value);
    Ok(())
}
