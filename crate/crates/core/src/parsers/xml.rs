//! A small owned XML tree, enough for the attribute-style dialects we read.

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    /// Local name, namespace prefix stripped.
    pub name: String,
    /// Name as written, prefix included.
    pub qualified_name: String,
    pub attributes: Vec<(String, String)>,
    pub children: Vec<Element>,
    pub text: String,
    /// Byte offset of the start tag.
    pub position: u64,
}

impl Element {
    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attributes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn children_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.children.iter().filter(move |c| c.name == name)
    }

    pub fn child(&self, name: &str) -> Option<&Element> {
        self.children.iter().find(|c| c.name == name)
    }
}

fn start_element(start: &BytesStart<'_>, position: u64) -> Result<Element, ParseError> {
    let malformed = |message: String| ParseError::MalformedXml { position, message };
    let qualified_name = String::from_utf8(start.name().as_ref().to_vec()).map_err(|e| malformed(e.to_string()))?;
    let name = String::from_utf8(start.local_name().as_ref().to_vec()).map_err(|e| malformed(e.to_string()))?;
    let mut attributes = Vec::new();
    for attr in start.attributes() {
        let attr = attr.map_err(|e| malformed(e.to_string()))?;
        let key = String::from_utf8(attr.key.as_ref().to_vec()).map_err(|e| malformed(e.to_string()))?;
        let value = attr.unescape_value().map_err(|e| malformed(e.to_string()))?.into_owned();
        attributes.push((key, value));
    }
    Ok(Element { name, qualified_name, attributes, children: Vec::new(), text: String::new(), position })
}

/// Parses a whole document into its root element. `Ok(None)` means the
/// document holds no element at all.
pub fn parse_document(bytes: &[u8]) -> Result<Option<Element>, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::NotUtf8 { valid_up_to: e.valid_up_to() })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let bom = (bytes.len() - text.len()) as u64;
    let mut reader = Reader::from_str(text);
    reader.config_mut().check_end_names = true;

    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    loop {
        let position = reader.buffer_position() + bom;
        let event = reader.read_event().map_err(|e| ParseError::MalformedXml {
            position: reader.error_position() + bom,
            message: e.to_string(),
        })?;
        match event {
            Event::Start(start) => stack.push(start_element(&start, position)?),
            Event::Empty(start) => {
                let element = start_element(&start, position)?;
                attach(&mut stack, &mut root, element, position)?;
            }
            Event::End(_) => {
                let element = stack.pop().ok_or_else(|| ParseError::MalformedXml {
                    position,
                    message: "unexpected end tag".into(),
                })?;
                attach(&mut stack, &mut root, element, position)?;
            }
            Event::Text(t) => {
                let s = t.unescape().map_err(|e| ParseError::MalformedXml { position, message: e.to_string() })?;
                match stack.last_mut() {
                    Some(top) => top.text.push_str(&s),
                    None if s.trim().is_empty() => {}
                    None => {
                        return Err(ParseError::MalformedXml { position, message: "text outside the root element".into() })
                    }
                }
            }
            Event::CData(c) => {
                if let Some(top) = stack.last_mut() {
                    top.text.push_str(&String::from_utf8_lossy(&c.into_inner()));
                }
            }
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }
    if let Some(open) = stack.last() {
        return Err(ParseError::MalformedXml {
            position: (text.len() as u64) + bom,
            message: format!("unclosed element <{}>", open.qualified_name),
        });
    }
    Ok(root)
}

fn attach(stack: &mut [Element], root: &mut Option<Element>, element: Element, position: u64) -> Result<(), ParseError> {
    match stack.last_mut() {
        Some(parent) => parent.children.push(element),
        None if root.is_none() => *root = Some(element),
        None => return Err(ParseError::MalformedXml { position, message: "more than one root element".into() }),
    }
    Ok(())
}
