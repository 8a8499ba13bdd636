use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::error::UnknownClass;

/// Direction of a derivation link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkDirection {
    /// Higher-level event derived from lower-level events.
    BottomUp,
    /// Lower-level event prompted by a higher-level event.
    TopDown,
}

impl LinkDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkDirection::BottomUp => "bottom_up",
            LinkDirection::TopDown => "top_down",
        }
    }
}

impl FromStr for LinkDirection {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bottom_up" => Ok(LinkDirection::BottomUp),
            "top_down" => Ok(LinkDirection::TopDown),
            other => Err(UnknownClass(other.to_string())),
        }
    }
}

/// Taxonomy of objects: data sources, business objects and general objects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectClass {
    Sensor,
    InformationSystem,
    Link(LinkDirection),
    CaseObject,
    ContextObject,
    Activity,
    Subprocess,
    Resource,
    Machine,
    Other(String),
}

impl ObjectClass {
    pub fn is_data_source(&self) -> bool {
        matches!(self, ObjectClass::Sensor | ObjectClass::InformationSystem | ObjectClass::Link(_))
    }

    pub fn is_business(&self) -> bool {
        matches!(self, ObjectClass::CaseObject | ObjectClass::ContextObject)
    }

    pub fn is_general(&self) -> bool {
        !self.is_data_source() && !self.is_business()
    }

    pub fn link_direction(&self) -> Option<LinkDirection> {
        match self {
            ObjectClass::Link(d) => Some(*d),
            _ => None,
        }
    }

    /// Class code without the link direction, e.g. `data_source.link`.
    pub fn base_code(&self) -> String {
        match self {
            ObjectClass::Sensor => "data_source.sensor".into(),
            ObjectClass::InformationSystem => "data_source.information_system".into(),
            ObjectClass::Link(_) => "data_source.link".into(),
            ObjectClass::CaseObject => "business.case_object".into(),
            ObjectClass::ContextObject => "business.context_object".into(),
            ObjectClass::Activity => "general.activity".into(),
            ObjectClass::Subprocess => "general.subprocess".into(),
            ObjectClass::Resource => "general.resource".into(),
            ObjectClass::Machine => "general.machine".into(),
            ObjectClass::Other(label) => format!("general.other:{label}"),
        }
    }

    /// Inverse of [`ObjectClass::base_code`]; links need their direction
    /// supplied separately.
    pub fn from_base_code(
        code: &str,
        direction: Option<LinkDirection>,
    ) -> Result<Self, UnknownClass> {
        let class = match code {
            "data_source.sensor" => ObjectClass::Sensor,
            "data_source.information_system" => ObjectClass::InformationSystem,
            "data_source.link" => match direction {
                Some(d) => ObjectClass::Link(d),
                None => return Err(UnknownClass(format!("{code} (missing direction)"))),
            },
            "business.case_object" => ObjectClass::CaseObject,
            "business.context_object" => ObjectClass::ContextObject,
            "general.activity" => ObjectClass::Activity,
            "general.subprocess" => ObjectClass::Subprocess,
            "general.resource" => ObjectClass::Resource,
            "general.machine" => ObjectClass::Machine,
            other => match other.strip_prefix("general.other:") {
                Some(label) => ObjectClass::Other(label.to_string()),
                None => return Err(UnknownClass(other.to_string())),
            },
        };
        Ok(class)
    }
}

/// Full code including the link direction, e.g. `data_source.link:bottom_up`.
impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectClass::Link(d) => write!(f, "data_source.link:{}", d.as_str()),
            other => f.write_str(&other.base_code()),
        }
    }
}

impl FromStr for ObjectClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(direction) = s.strip_prefix("data_source.link:") {
            return Ok(ObjectClass::Link(direction.parse()?));
        }
        ObjectClass::from_base_code(s, None)
    }
}

impl Serialize for ObjectClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ObjectClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// The three event classes, from lowest to highest granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventClass {
    Observation,
    IotEvent,
    ProcessEvent,
}

impl EventClass {
    pub const ALL: [EventClass; 3] =
        [EventClass::ProcessEvent, EventClass::IotEvent, EventClass::Observation];

    pub fn as_str(self) -> &'static str {
        match self {
            EventClass::ProcessEvent => "process_event",
            EventClass::IotEvent => "iot_event",
            EventClass::Observation => "observation",
        }
    }
}

impl fmt::Display for EventClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "process_event" => Ok(EventClass::ProcessEvent),
            "iot_event" => Ok(EventClass::IotEvent),
            "observation" => Ok(EventClass::Observation),
            other => Err(UnknownClass(other.to_string())),
        }
    }
}
