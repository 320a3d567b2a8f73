// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use super::AgentError;

/// A simulated constrained link: payloads are cut into fragments of at most
/// `mtu - overhead` bytes, and each fragment pays `overhead` header bytes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkProfile {
    pub name: String,
    pub mtu: u64,
    pub overhead: u64,
}

impl LinkProfile {
    pub fn new(name: impl Into<String>, mtu: u64, overhead: u64) -> Result<Self, AgentError> {
        let link = Self {
            name: name.into(),
            mtu,
            overhead,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if self.mtu == 0 || self.mtu <= self.overhead {
            return Err(AgentError::InvalidLink(format!(
                "{}: mtu {} must exceed overhead {}",
                self.name, self.mtu, self.overhead
            )));
        }
        Ok(())
    }

    pub fn mqtt_like() -> Self {
        Self::new("mqtt-like", 256, 2).expect("valid default")
    }

    pub fn coap_like() -> Self {
        Self::new("coap-like", 256, 4).expect("valid default")
    }

    pub fn ble_like() -> Self {
        Self::new("ble-like", 244, 3).expect("valid default")
    }

    pub fn lora_like() -> Self {
        Self::new("lora-like", 51, 4).expect("valid default")
    }

    pub fn defaults() -> Vec<Self> {
        vec![
            Self::mqtt_like(),
            Self::coap_like(),
            Self::ble_like(),
            Self::lora_like(),
        ]
    }

    pub fn by_name(name: &str, profiles: &[Self]) -> Result<Self, AgentError> {
        profiles
            .iter()
            .find(|p| p.name == name)
            .cloned()
            .ok_or_else(|| AgentError::InvalidLink(format!("unknown link profile {name:?}")))
    }
}

impl fmt::Display for LinkProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mtu {}, overhead {})", self.name, self.mtu, self.overhead)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkFile {
    link: Vec<LinkProfile>,
}

/// Parse `[[link]]` tables with `name`, `mtu` and `overhead` keys.
pub fn load_link_profiles(text: &str) -> Result<Vec<LinkProfile>, AgentError> {
    let file: LinkFile = toml::from_str(text).map_err(|e| AgentError::InvalidLink(e.to_string()))?;
    for link in &file.link {
        link.validate()?;
    }
    Ok(file.link)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transmission {
    pub fragments: u64,
    pub bytes: u64,
}

pub fn transmit(link: &LinkProfile, payload_len: u64) -> Transmission {
    let fragments = payload_len.div_ceil(link.mtu - link.overhead);
    Transmission {
        fragments,
        bytes: payload_len + fragments * link.overhead,
    }
}
