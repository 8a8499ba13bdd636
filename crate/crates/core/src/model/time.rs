use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::error::InvalidTimestamp;

/// An instant in time, nanosecond resolution.
///
/// Inputs may carry any UTC offset; the value is normalized to UTC so that
/// equality and ordering are by instant. The canonical text form is RFC 3339
/// with a `Z` designator and only as many fractional digits as needed
/// (0, 3, 6 or 9).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

/// Outcome of parsing a timestamp that may lack an offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParsedTimestamp {
    pub timestamp: Timestamp,
    /// The input had no offset and was read as UTC.
    pub assumed_utc: bool,
}

impl Timestamp {
    pub const UNIX_EPOCH: Timestamp = Timestamp(DateTime::<Utc>::UNIX_EPOCH);

    pub fn from_datetime<Tz: TimeZone>(dt: DateTime<Tz>) -> Self {
        Self(dt.with_timezone(&Utc))
    }

    pub fn from_unix_millis(millis: i64) -> Option<Self> {
        DateTime::from_timestamp_millis(millis).map(Self)
    }

    pub fn from_unix_nanos(nanos: i64) -> Self {
        Self(DateTime::from_timestamp_nanos(nanos))
    }

    /// Strict parse: the input must carry an explicit offset.
    pub fn parse(s: &str) -> Result<Self, InvalidTimestamp> {
        let parsed = Self::parse_lenient(s)?;
        if parsed.assumed_utc {
            return Err(InvalidTimestamp::MissingOffset(s.to_string()));
        }
        Ok(parsed.timestamp)
    }

    /// Accepts RFC 3339 with offset, or a naive date-time (`T` or space
    /// separated, optional fraction) or bare date that is then read as UTC.
    pub fn parse_lenient(s: &str) -> Result<ParsedTimestamp, InvalidTimestamp> {
        let trimmed = s.trim();
        if let Ok(dt) = DateTime::parse_from_rfc3339(trimmed) {
            return Ok(ParsedTimestamp { timestamp: Self::from_datetime(dt), assumed_utc: false });
        }
        // RFC 3339 requires the `T`; accept a space as well
        if let Ok(dt) = DateTime::parse_from_str(trimmed, "%Y-%m-%d %H:%M:%S%.f%:z") {
            return Ok(ParsedTimestamp { timestamp: Self::from_datetime(dt), assumed_utc: false });
        }
        for format in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
            if let Ok(naive) = NaiveDateTime::parse_from_str(trimmed, format) {
                return Ok(ParsedTimestamp {
                    timestamp: Self(Utc.from_utc_datetime(&naive)),
                    assumed_utc: true,
                });
            }
        }
        if let Ok(date) = NaiveDate::parse_from_str(trimmed, "%Y-%m-%d") {
            let naive = date.and_hms_opt(0, 0, 0).expect("midnight is valid");
            return Ok(ParsedTimestamp {
                timestamp: Self(Utc.from_utc_datetime(&naive)),
                assumed_utc: true,
            });
        }
        Err(InvalidTimestamp::Unparseable(s.to_string()))
    }

    pub fn as_datetime(&self) -> DateTime<Utc> {
        self.0
    }

    pub fn unix_nanos(&self) -> Option<i64> {
        self.0.timestamp_nanos_opt()
    }

    pub fn to_canonical_string(&self) -> String {
        self.0.to_rfc3339_opts(SecondsFormat::AutoSi, true)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl FromStr for Timestamp {
    type Err = InvalidTimestamp;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_canonical_string())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Timestamp::parse(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_compare_by_instant() {
        let a = Timestamp::parse("2024-03-01T14:54:57+02:00").unwrap();
        let b = Timestamp::parse("2024-03-01T12:54:57Z").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_canonical_string(), "2024-03-01T12:54:57Z");
    }

    #[test]
    fn canonical_form_keeps_sub_second_precision() {
        let t = Timestamp::parse("2024-03-01T12:54:57.250+00:00").unwrap();
        assert_eq!(t.to_canonical_string(), "2024-03-01T12:54:57.250Z");
        let t = Timestamp::parse("2024-03-01T12:54:57.000001Z").unwrap();
        assert_eq!(t.to_canonical_string(), "2024-03-01T12:54:57.000001Z");
        assert_eq!(Timestamp::parse(&t.to_canonical_string()).unwrap(), t);
    }

    #[test]
    fn naive_inputs_are_flagged() {
        let p = Timestamp::parse_lenient("2024-03-01 12:34:56").unwrap();
        assert!(p.assumed_utc);
        assert_eq!(p.timestamp.to_canonical_string(), "2024-03-01T12:34:56Z");
        assert!(matches!(
            Timestamp::parse("2024-03-01T12:34:56"),
            Err(InvalidTimestamp::MissingOffset(_))
        ));
        assert!(Timestamp::parse_lenient("12:34").is_err());
    }
}
