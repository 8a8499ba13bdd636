use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Diagnostic codes. Stable across versions; external tooling keys on them.
///
/// E002-E008 and W001 come from [`super::validate`]. W002-W006 are raised
/// while reading inputs (parsers, OCEL import) and appear in parse reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Code {
    /// Event has no data-source e2o neighbor.
    E002,
    /// Event has more than one data-source e2o neighbor.
    E003,
    /// Event has no business-object e2o neighbor.
    E004,
    /// Relation points at a record that does not exist.
    E005,
    /// Observation whose event_type is not "observed".
    E006,
    /// Process event without activity, or with event_type != activity.
    E007,
    /// Cycle in the event-to-event graph.
    E008,
    /// Derived event is earlier than one of its sources.
    W001,
    /// Input timestamp had no offset and was read as UTC.
    W002,
    /// Duplicate id skipped in lenient mode.
    W003,
    /// Class missing on OCEL import; a default was applied.
    W004,
    /// Input or container holds no records.
    W005,
    /// Source record dropped without a counterpart.
    W006,
}

impl Code {
    pub const ALL: [Code; 13] = [
        Code::E002,
        Code::E003,
        Code::E004,
        Code::E005,
        Code::E006,
        Code::E007,
        Code::E008,
        Code::W001,
        Code::W002,
        Code::W003,
        Code::W004,
        Code::W005,
        Code::W006,
    ];

    pub fn severity(self) -> Severity {
        if self.as_str().starts_with('E') {
            Severity::Error
        } else {
            Severity::Warning
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Code::E002 => "E002",
            Code::E003 => "E003",
            Code::E004 => "E004",
            Code::E005 => "E005",
            Code::E006 => "E006",
            Code::E007 => "E007",
            Code::E008 => "E008",
            Code::W001 => "W001",
            Code::W002 => "W002",
            Code::W003 => "W003",
            Code::W004 => "W004",
            Code::W005 => "W005",
            Code::W006 => "W006",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Code {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Code::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| format!("unknown diagnostic code {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// One finding. Ordering is (severity, code, subject, message), which is the
/// order reports are emitted in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    /// Id of the offending record; `None` for log-level findings.
    pub subject: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: Code, subject: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            severity: code.severity(),
            code,
            subject: subject.map(str::to_string),
            message: message.into(),
        }
    }

    pub fn about(code: Code, subject: impl fmt::Display, message: impl Into<String>) -> Self {
        Self::new(code, Some(&subject.to_string()), message)
    }

    pub fn log_level(code: Code, message: impl Into<String>) -> Self {
        Self::new(code, None, message)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}: {}",
            self.code,
            self.severity,
            self.subject.as_deref().unwrap_or("-"),
            self.message
        )
    }
}
