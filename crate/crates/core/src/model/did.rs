// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

/// A decentralized identifier, `did:<method>:<method-specific-id>`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Did {
    method: String,
    method_id: String,
}

fn malformed(text: &str, why: &'static str) -> ModelError {
    ModelError::MalformedDid {
        input: text.to_owned(),
        reason: why,
    }
}

fn is_id_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_')
}

impl Did {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let rest = text
            .strip_prefix("did:")
            .ok_or_else(|| malformed(text, "missing did: prefix"))?;
        let (method, method_id) = rest
            .split_once(':')
            .ok_or_else(|| malformed(text, "missing method-specific identifier"))?;
        if method.is_empty() {
            return Err(malformed(text, "empty method"));
        }
        if !method.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit()) {
            return Err(malformed(text, "method must be lowercase alphanumeric"));
        }
        if method_id.is_empty() {
            return Err(malformed(text, "empty method-specific identifier"));
        }
        // ':' separates non-empty segments only.
        for segment in method_id.split(':') {
            if segment.is_empty() {
                return Err(malformed(text, "empty identifier segment"));
            }
            if !segment.chars().all(is_id_char) {
                return Err(malformed(text, "illegal character in identifier"));
            }
        }
        Ok(Self {
            method: method.to_owned(),
            method_id: method_id.to_owned(),
        })
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn method_specific_id(&self) -> &str {
        &self.method_id
    }

    /// DID URL naming `fragment` inside this DID's document.
    pub fn with_fragment(&self, fragment: &str) -> Result<DidUrl, ModelError> {
        DidUrl::new(self.clone(), fragment)
    }
}

impl fmt::Display for Did {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "did:{}:{}", self.method, self.method_id)
    }
}

impl FromStr for Did {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// A DID plus `#fragment`, naming a key or service inside a document.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DidUrl {
    did: Did,
    fragment: String,
}

impl DidUrl {
    pub fn new(did: Did, fragment: &str) -> Result<Self, ModelError> {
        if fragment.is_empty() || !fragment.chars().all(is_id_char) {
            return Err(ModelError::MalformedDidUrl(format!("{did}#{fragment}")));
        }
        Ok(Self {
            did,
            fragment: fragment.to_owned(),
        })
    }

    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let (did, fragment) = text
            .split_once('#')
            .ok_or_else(|| ModelError::MalformedDidUrl(text.to_owned()))?;
        Self::new(Did::parse(did)?, fragment)
    }

    pub fn did(&self) -> &Did {
        &self.did
    }

    pub fn fragment(&self) -> &str {
        &self.fragment
    }
}

impl fmt::Display for DidUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.did, self.fragment)
    }
}

impl FromStr for DidUrl {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let text = String::deserialize(deserializer)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(Did);
string_serde!(DidUrl);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_listing_identifiers() {
        let sov = Did::parse("did:sov:123456789").unwrap();
        assert_eq!(sov.method(), "sov");
        assert_eq!(sov.method_specific_id(), "123456789");

        let iot = Did::parse("did:iot:manufacturer:123456789").unwrap();
        assert_eq!(iot.method(), "iot");
        assert_eq!(iot.method_specific_id(), "manufacturer:123456789");
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "urn:uuid:1234",
            "did:",
            "did:sov",
            "did::123",
            "did:sov:",
            "did:Sov:123",
            "did:sov:12 34",
            "did:iot:a::b",
            "did:iot:a:",
            "did:iot::a",
            "did:iot:a/b",
        ] {
            assert!(
                matches!(Did::parse(bad), Err(ModelError::MalformedDid { .. })),
                "{bad:?} should be rejected"
            );
        }
    }

    #[test]
    fn did_url_round_trip() {
        let url = DidUrl::parse("did:sov:123456789#key-1").unwrap();
        assert_eq!(url.did().to_string(), "did:sov:123456789");
        assert_eq!(url.fragment(), "key-1");
        assert_eq!(url.to_string(), "did:sov:123456789#key-1");
        assert!(DidUrl::parse("did:sov:123456789#").is_err());
        assert!(DidUrl::parse("did:sov:123456789").is_err());
    }

    fn did_strategy() -> impl Strategy<Value = String> {
        ("[a-z0-9]{1,8}", prop::collection::vec("[A-Za-z0-9._-]{1,12}", 1..4))
            .prop_map(|(m, segs)| format!("did:{m}:{}", segs.join(":")))
    }

    proptest! {
        #[test]
        fn parse_render_round_trip(text in did_strategy()) {
            let did = Did::parse(&text).unwrap();
            prop_assert_eq!(did.to_string(), text.clone());
            prop_assert_eq!(Did::parse(&did.to_string()).unwrap(), did);
        }
    }
}
