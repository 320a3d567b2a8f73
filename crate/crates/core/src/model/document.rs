// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Did, DidUrl, KeyPair, KeyType, ModelError};

pub const DID_CORE_CONTEXT: &str = "https://www.w3.org/ns/did/v1";
pub const ED25519_2018_CONTEXT: &str = "https://w3id.org/security/suites/ed25519-2018/v1";
pub const X25519_2019_CONTEXT: &str = "https://w3id.org/security/suites/x25519-2019/v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationMethod {
    pub id: DidUrl,
    #[serde(rename = "type")]
    pub key_type: KeyType,
    #[serde(rename = "publicKeyBase58", with = "super::bytes")]
    pub public_key: Vec<u8>,
}

impl VerificationMethod {
    pub fn ed25519(id: DidUrl, keys: &KeyPair) -> Self {
        Self {
            id,
            key_type: KeyType::Ed25519Verification,
            public_key: keys.public_key().to_vec(),
        }
    }

    pub fn x25519(id: DidUrl, keys: &KeyPair) -> Self {
        Self {
            id,
            key_type: KeyType::X25519KeyAgreement,
            public_key: keys.agreement_public_key().to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceEndpoint {
    pub id: DidUrl,
    #[serde(rename = "type")]
    pub service_type: String,
    #[serde(rename = "serviceEndpoint")]
    pub endpoint: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DidDocument {
    #[serde(rename = "@context")]
    pub context: Vec<String>,
    pub id: Did,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<Did>,
    #[serde(rename = "verificationMethod")]
    pub verification_methods: Vec<VerificationMethod>,
    pub authentication: Vec<DidUrl>,
    #[serde(rename = "keyAgreement", default, skip_serializing_if = "Vec::is_empty")]
    pub key_agreement: Vec<DidUrl>,
    #[serde(rename = "service")]
    pub services: Vec<ServiceEndpoint>,
}

/// Assemble a document. Authentication references the first Ed25519 key;
/// every X25519 key is listed under `keyAgreement`.
pub fn build_did_document(
    id: Did,
    controller: Option<Did>,
    keys: Vec<VerificationMethod>,
    services: Vec<ServiceEndpoint>,
) -> Result<DidDocument, ModelError> {
    let first_signing = keys
        .iter()
        .find(|k| k.key_type == KeyType::Ed25519Verification)
        .ok_or(ModelError::EmptyKeyList)?;
    let authentication = vec![first_signing.id.clone()];
    let key_agreement = keys
        .iter()
        .filter(|k| k.key_type == KeyType::X25519KeyAgreement)
        .map(|k| k.id.clone())
        .collect::<Vec<_>>();
    let mut context = vec![DID_CORE_CONTEXT.to_owned(), ED25519_2018_CONTEXT.to_owned()];
    if !key_agreement.is_empty() {
        context.push(X25519_2019_CONTEXT.to_owned());
    }
    let doc = DidDocument {
        context,
        id,
        controller,
        verification_methods: keys,
        authentication,
        key_agreement,
        services,
    };
    doc.validate()?;
    Ok(doc)
}

impl DidDocument {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.context.first().map(String::as_str) != Some(DID_CORE_CONTEXT) {
            return Err(ModelError::MalformedDocument(
                "first @context must be the DID core context".into(),
            ));
        }
        if self.verification_methods.is_empty() {
            return Err(ModelError::EmptyKeyList);
        }
        let mut fragments = BTreeSet::new();
        let ids = self
            .verification_methods
            .iter()
            .map(|m| &m.id)
            .chain(self.services.iter().map(|s| &s.id));
        for id in ids {
            if !fragments.insert(id.to_string()) {
                return Err(ModelError::DuplicateFragment(id.fragment().to_owned()));
            }
        }
        for method in &self.verification_methods {
            if method.public_key.len() != method.key_type.key_len() {
                return Err(ModelError::MalformedDocument(format!(
                    "{} carries {} key bytes, expected {}",
                    method.id,
                    method.public_key.len(),
                    method.key_type.key_len()
                )));
            }
        }
        for reference in &self.authentication {
            match self.method(reference) {
                Some(m) if m.key_type == KeyType::Ed25519Verification => {}
                _ => {
                    return Err(ModelError::MalformedDocument(format!(
                        "authentication reference {reference} does not resolve to a signing key"
                    )))
                }
            }
        }
        for reference in &self.key_agreement {
            match self.method(reference) {
                Some(m) if m.key_type == KeyType::X25519KeyAgreement => {}
                _ => {
                    return Err(ModelError::MalformedDocument(format!(
                        "keyAgreement reference {reference} does not resolve to an agreement key"
                    )))
                }
            }
        }
        if let Some(s) = self.services.iter().find(|s| s.endpoint.is_empty()) {
            return Err(ModelError::MalformedDocument(format!(
                "service {} has an empty endpoint",
                s.id
            )));
        }
        Ok(())
    }

    pub fn method(&self, id: &DidUrl) -> Option<&VerificationMethod> {
        self.verification_methods.iter().find(|m| &m.id == id)
    }

    /// Ed25519 key under `id`, provided it is listed for authentication.
    pub fn authentication_key(&self, id: &DidUrl) -> Option<&VerificationMethod> {
        self.authentication
            .contains(id)
            .then(|| self.method(id))
            .flatten()
            .filter(|m| m.key_type == KeyType::Ed25519Verification)
    }

    /// Any Ed25519 key under `id`, for checking assertion proofs.
    pub fn signing_key(&self, id: &DidUrl) -> Option<&VerificationMethod> {
        self.method(id).filter(|m| m.key_type == KeyType::Ed25519Verification)
    }

    pub fn agreement_key(&self) -> Option<&VerificationMethod> {
        self.key_agreement.iter().find_map(|id| self.method(id))
    }

    /// The DID whose keys manage this document besides the subject's own.
    pub fn controller(&self) -> Option<&Did> {
        self.controller.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode_canonical_text;

    fn device_doc(controller: Option<Did>) -> DidDocument {
        let did = Did::parse("did:sov:123456789").unwrap();
        let keys = KeyPair::from_seed(&[1u8; 32]).unwrap();
        build_did_document(
            did.clone(),
            controller,
            vec![VerificationMethod::ed25519(did.with_fragment("key-1").unwrap(), &keys)],
            vec![
                ServiceEndpoint {
                    id: did.with_fragment("mqtt").unwrap(),
                    service_type: "MqttEndpoint".into(),
                    endpoint: "broker.example.mqtt.com".into(),
                },
                ServiceEndpoint {
                    id: did.with_fragment("http").unwrap(),
                    service_type: "HttpEndpoint".into(),
                    endpoint: "example.com".into(),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn document_matches_reference_shape() {
        let doc = device_doc(None);
        assert_eq!(
            doc.authentication,
            vec![DidUrl::parse("did:sov:123456789#key-1").unwrap()]
        );
        let text = String::from_utf8(encode_canonical_text(&doc)).unwrap();
        assert!(text.starts_with(r#"{"@context":["https://www.w3.org/ns/did/v1","#));
        assert!(text.contains(r#""type":"Ed25519VerificationKey2018""#));
        assert!(text.contains(r#""publicKeyBase58":""#));
        assert!(text.contains(r#""serviceEndpoint":"broker.example.mqtt.com""#));
        assert!(text.contains(r#""type":"MqttEndpoint""#));
        assert!(!text.contains("controller"));
    }

    #[test]
    fn controller_populated() {
        let owner = Did::parse("did:iot:user:123456789").unwrap();
        let doc = device_doc(Some(owner.clone()));
        assert_eq!(doc.controller(), Some(&owner));
        let text = String::from_utf8(encode_canonical_text(&doc)).unwrap();
        assert!(text.contains(r#""controller":"did:iot:user:123456789""#));
    }

    #[test]
    fn empty_key_list() {
        let did = Did::parse("did:sov:1").unwrap();
        assert!(matches!(
            build_did_document(did, None, vec![], vec![]),
            Err(ModelError::EmptyKeyList)
        ));
    }

    #[test]
    fn duplicate_fragment() {
        let did = Did::parse("did:sov:1").unwrap();
        let keys = KeyPair::from_seed(&[1u8; 32]).unwrap();
        let url = did.with_fragment("key-1").unwrap();
        let err = build_did_document(
            did,
            None,
            vec![
                VerificationMethod::ed25519(url.clone(), &keys),
                VerificationMethod::x25519(url, &keys),
            ],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::DuplicateFragment(f) if f == "key-1"));
    }

    #[test]
    fn agreement_key_is_listed() {
        let did = Did::parse("did:iot:device:1").unwrap();
        let keys = KeyPair::from_seed(&[2u8; 32]).unwrap();
        let doc = build_did_document(
            did.clone(),
            None,
            vec![
                VerificationMethod::ed25519(did.with_fragment("key-1").unwrap(), &keys),
                VerificationMethod::x25519(did.with_fragment("agree-1").unwrap(), &keys),
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(doc.agreement_key().unwrap().public_key, keys.agreement_public_key());
        assert!(doc.authentication_key(&did.with_fragment("agree-1").unwrap()).is_none());
    }

    #[test]
    fn validate_catches_dangling_authentication() {
        let mut doc = device_doc(None);
        doc.authentication
            .push(DidUrl::parse("did:sov:123456789#nope").unwrap());
        assert!(matches!(doc.validate(), Err(ModelError::MalformedDocument(_))));
    }
}
