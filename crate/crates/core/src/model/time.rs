// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

/// A UTC instant with whole-second precision.
///
/// Text encodings render RFC 3339 with a `Z` suffix; binary encodings carry
/// seconds since the Unix epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub fn from_unix(secs: i64) -> Option<Self> {
        DateTime::<Utc>::from_timestamp(secs, 0).map(|_| Self(secs))
    }

    pub fn unix(self) -> i64 {
        self.0
    }

    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let parsed = DateTime::parse_from_rfc3339(text).map_err(|_| ModelError::MalformedTimestamp(text.to_owned()))?;
        Ok(Self(parsed.timestamp()))
    }

    pub fn checked_add_secs(self, secs: i64) -> Option<Self> {
        self.0.checked_add(secs).and_then(Self::from_unix)
    }

    pub fn date(self) -> NaiveDate {
        self.datetime().date_naive()
    }

    /// Seconds from `earlier` to `self`; negative when `earlier` is later.
    pub fn seconds_since(self, earlier: Timestamp) -> i64 {
        self.0 - earlier.0
    }

    fn datetime(self) -> DateTime<Utc> {
        // Construction guarantees the value is representable.
        DateTime::<Utc>::from_timestamp(self.0, 0).expect("timestamp within chrono range")
    }

    /// Current wall-clock time. Library operations never call this; it exists
    /// for command-line defaults.
    pub fn now() -> Self {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self(i64::try_from(secs).unwrap_or(i64::MAX))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.datetime().to_rfc3339_opts(SecondsFormat::Secs, true))
    }
}

impl FromStr for Timestamp {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if serializer.is_human_readable() {
            serializer.collect_str(self)
        } else {
            serializer.serialize_i64(self.0)
        }
    }
}

struct TimestampVisitor;

impl Visitor<'_> for TimestampVisitor {
    type Value = Timestamp;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an RFC 3339 timestamp or integer seconds since the epoch")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Timestamp, E> {
        Timestamp::parse(v).map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Timestamp, E> {
        Timestamp::from_unix(v).ok_or_else(|| E::custom("timestamp out of range"))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Timestamp, E> {
        i64::try_from(v)
            .ok()
            .and_then(Timestamp::from_unix)
            .ok_or_else(|| E::custom("timestamp out of range"))
    }
}

// Accepts either shape regardless of the format's human-readable flag: serde's
// buffering for untagged enums does not forward that flag.
impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(TimestampVisitor)
    }
}
