//! Typed XES attribute elements (`<string key=.. value=..>` and friends).

use std::collections::BTreeMap;

use super::xml::Element;
use super::{Builder, ParseError};
use crate::model::{AttributeValue, Identifier, Timestamp};
use crate::validation::{Code, Diagnostic};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum XesValue {
    Scalar(AttributeValue),
    /// Kept as written; parsed only where a timestamp is expected.
    Date(String),
    List(Vec<XesAttr>),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct XesAttr {
    pub key: String,
    pub value: XesValue,
}

impl XesAttr {
    pub fn as_scalar(&self) -> Option<AttributeValue> {
        match &self.value {
            XesValue::Scalar(v) => Some(v.clone()),
            XesValue::Date(s) => Some(AttributeValue::Text(s.clone())),
            XesValue::List(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<String> {
        match &self.value {
            XesValue::Scalar(AttributeValue::Text(s)) | XesValue::Date(s) => Some(s.clone()),
            XesValue::Scalar(v) => Some(v.to_json().to_string()),
            XesValue::List(_) => None,
        }
    }

    pub fn children(&self) -> &[XesAttr] {
        match &self.value {
            XesValue::List(items) => items,
            _ => &[],
        }
    }
}

const TYPED: [&str; 8] = ["string", "id", "int", "float", "boolean", "date", "list", "container"];

pub(crate) fn is_attribute_element(el: &Element) -> bool {
    TYPED.contains(&el.name.as_str())
}

/// Reads one typed attribute element. List children may be wrapped in a
/// `<values>` element (XES 2.0) or appear directly.
pub(crate) fn read_attr(el: &Element, path: &str) -> Result<XesAttr, ParseError> {
    let key = el.attr("key").ok_or_else(|| ParseError::schema(path, format!("<{}> without key", el.name)))?;
    let path = format!("{path}/{}[@key={key:?}]", el.name);
    let raw = || el.attr("value").ok_or_else(|| ParseError::schema(&path, "missing value"));
    let value = match el.name.as_str() {
        "string" | "id" => XesValue::Scalar(AttributeValue::Text(raw()?.to_string())),
        "int" => {
            let s = raw()?;
            XesValue::Scalar(AttributeValue::Integer(
                s.trim().parse().map_err(|_| ParseError::schema(&path, format!("{s:?} is not an integer")))?,
            ))
        }
        "float" => {
            let s = raw()?;
            let f: f64 = s.trim().parse().map_err(|_| ParseError::schema(&path, format!("{s:?} is not a number")))?;
            // NaN and infinities survive as text; OCEL cannot carry them
            XesValue::Scalar(if f.is_finite() { AttributeValue::Real(f) } else { AttributeValue::Text(s.to_string()) })
        }
        "boolean" => {
            let s = raw()?;
            XesValue::Scalar(AttributeValue::Boolean(match s.trim() {
                "true" => true,
                "false" => false,
                _ => return Err(ParseError::schema(&path, format!("{s:?} is not a boolean"))),
            }))
        }
        "date" => XesValue::Date(raw()?.to_string()),
        "list" | "container" => {
            let mut items = Vec::new();
            for child in &el.children {
                let nested: Vec<&Element> =
                    if child.name == "values" { child.children.iter().collect() } else { vec![child] };
                for n in nested {
                    if is_attribute_element(n) {
                        items.push(read_attr(n, &path)?);
                    }
                }
            }
            XesValue::List(items)
        }
        other => return Err(ParseError::schema(path, format!("<{other}> is not an attribute element"))),
    };
    Ok(XesAttr { key: key.to_string(), value })
}

/// Typed attribute children of `el`; anything else is returned separately.
pub(crate) fn split_children<'a>(el: &'a Element, path: &str) -> Result<(Vec<XesAttr>, Vec<&'a Element>), ParseError> {
    let mut attrs = Vec::new();
    let mut rest = Vec::new();
    for child in &el.children {
        if is_attribute_element(child) {
            attrs.push(read_attr(child, path)?);
        } else {
            rest.push(child);
        }
    }
    Ok((attrs, rest))
}

/// Flattens nested lists into `parent/child` keys. Sibling keys that repeat
/// get a `#n` suffix (1-based) so nothing collapses.
pub(crate) fn flatten_into(prefix: &str, items: &[XesAttr], out: &mut BTreeMap<String, AttributeValue>) {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for item in items {
        *seen.entry(item.key.as_str()).or_default() += 1;
    }
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for item in items {
        let n = index.entry(item.key.as_str()).or_default();
        *n += 1;
        let mut key = if prefix.is_empty() { item.key.clone() } else { format!("{prefix}/{}", item.key) };
        if seen[item.key.as_str()] > 1 {
            key = format!("{key}#{n}");
        }
        match &item.value {
            XesValue::List(children) => flatten_into(&key, children, out),
            _ => {
                out.insert(key, item.as_scalar().expect("scalar"));
            }
        }
    }
}

/// Parses a timestamp, noting W002 when the offset had to be assumed.
/// Unparseable values yield `None` and no note; callers decide what to drop.
pub(crate) fn timestamp(raw: &str, subject: &Identifier, builder: &mut Builder) -> Option<Timestamp> {
    let parsed = Timestamp::parse_lenient(raw).ok()?;
    if parsed.assumed_utc {
        builder.note(Diagnostic::about(Code::W002, subject, format!("timestamp {raw:?} has no offset, read as UTC")));
    }
    Some(parsed.timestamp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parsers::xml::parse_document;

    #[test]
    fn reads_typed_values_and_lists() {
        let doc = br#"<event>
            <string key="a" value="x"/><int key="b" value="3"/><float key="c" value="1.5"/>
            <boolean key="d" value="true"/><date key="e" value="2024-01-01T00:00:00Z"/>
            <list key="l"><values><int key="v" value="1"/><int key="v" value="2"/></values></list>
            <foo/>
        </event>"#;
        let root = parse_document(doc).unwrap().unwrap();
        let (attrs, rest) = split_children(&root, "/event").unwrap();
        assert_eq!(attrs.len(), 6);
        assert_eq!(rest.len(), 1);
        let mut flat = BTreeMap::new();
        flatten_into("", &attrs, &mut flat);
        assert_eq!(flat["b"], AttributeValue::Integer(3));
        assert_eq!(flat["c"], AttributeValue::Real(1.5));
        assert_eq!(flat["e"], AttributeValue::Text("2024-01-01T00:00:00Z".into()));
        assert_eq!(flat["l/v#1"], AttributeValue::Integer(1));
        assert_eq!(flat["l/v#2"], AttributeValue::Integer(2));
    }

    #[test]
    fn bad_values_are_schema_violations() {
        let root = parse_document(br#"<e><int key="n" value="x"/></e>"#).unwrap().unwrap();
        let err = split_children(&root, "/e").unwrap_err();
        assert!(matches!(err, ParseError::SchemaViolation { ref path, .. } if path.contains("@key=\"n\"")), "{err}");
        let root = parse_document(br#"<e><string value="x"/></e>"#).unwrap().unwrap();
        assert!(split_children(&root, "/e").is_err());
    }
}
