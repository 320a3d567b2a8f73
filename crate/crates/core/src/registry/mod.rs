// SPDX-License-Identifier: Apache-2.0

//! Verifiable data registry: DID documents, schemas, credential status and
//! batch-level credentials.
//!
//! Every mutation except schema publication is authorized by a proof that
//! chains to the target DID's subject or controller keys.

mod file;
mod memory;
mod state;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codec::encode_canonical_text;
use crate::model::{Did, DidDocument, DidUrl, Proof, Timestamp, VerifiableCredential, VerificationMethod};
use crate::schemas::{CredentialKind, SchemaDefinition};

pub use file::FileRegistry;
pub use memory::MemoryRegistry;
pub use state::RegistrySnapshot;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CredentialState {
    Active,
    Revoked,
}

impl fmt::Display for CredentialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CredentialState::Active => "active",
            CredentialState::Revoked => "revoked",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StatusRecord {
    pub credential_id: String,
    pub issuer: Did,
    pub state: CredentialState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revoked_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl StatusRecord {
    pub fn is_active(&self) -> bool {
        self.state == CredentialState::Active
    }
}

/// The message a status proof signs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StatusChange {
    pub credential_id: String,
    pub state: CredentialState,
    pub at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl StatusChange {
    pub fn activate(credential_id: impl Into<String>, at: Timestamp) -> Self {
        Self {
            credential_id: credential_id.into(),
            state: CredentialState::Active,
            at,
            reason: None,
        }
    }

    pub fn revoke(credential_id: impl Into<String>, at: Timestamp, reason: Option<String>) -> Self {
        Self {
            credential_id: credential_id.into(),
            state: CredentialState::Revoked,
            at,
            reason,
        }
    }

    pub fn signing_input(&self) -> Vec<u8> {
        encode_canonical_text(self)
    }

    pub fn sign(&self, signer: &crate::model::Signer) -> Proof {
        Proof::create(&self.signing_input(), signer, self.at)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BatchKey {
    pub manufacturer: Did,
    pub model_no: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_no: Option<String>,
}

impl BatchKey {
    pub fn new(manufacturer: Did, model_no: impl Into<String>, batch_no: Option<String>) -> Self {
        Self {
            manufacturer,
            model_no: model_no.into(),
            batch_no,
        }
    }

    /// The model-level key this batch falls back to.
    pub fn model_level(&self) -> Self {
        Self {
            batch_no: None,
            ..self.clone()
        }
    }
}

impl fmt::Display for BatchKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.manufacturer, self.model_no)?;
        if let Some(batch) = &self.batch_no {
            write!(f, "/{batch}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("unauthorized update of {0}")]
    UnauthorizedUpdate(String),
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("status for {0} already exists")]
    StatusExists(String),
    #[error("{0} is already revoked")]
    AlreadyRevoked(String),
    #[error("{0} may only be revoked by its issuer")]
    UnauthorizedRevoker(String),
    #[error("{0} credentials cannot be published per batch")]
    KindNotBatchable(String),
    #[error("credential issuer {issuer} does not match batch manufacturer {manufacturer}")]
    IssuerMismatch { issuer: Did, manufacturer: Did },
    #[error("batch key needs a non-empty model number")]
    MalformedBatchKey,
    #[error("registry storage: {0}")]
    Storage(String),
}

/// How a signer relates to the DID whose keys were checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Authority {
    Subject,
    Controller,
}

impl fmt::Display for Authority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Authority::Subject => "subject",
            Authority::Controller => "controller",
        })
    }
}

/// Authentication key under `method` that may act for `target`: one of the
/// target document's own keys, or one of its controller's.
pub fn authority_key(
    target: &DidDocument,
    method: &DidUrl,
    resolve: impl FnOnce(&Did) -> Option<DidDocument>,
) -> Option<(VerificationMethod, Authority)> {
    let signer = method.did();
    if signer == &target.id {
        return target
            .authentication_key(method)
            .map(|k| (k.clone(), Authority::Subject));
    }
    if target.controller() == Some(signer) {
        let controller = resolve(signer)?;
        return controller
            .authentication_key(method)
            .map(|k| (k.clone(), Authority::Controller));
    }
    None
}

/// Check that `proof` over `message` was made by someone entitled to act for
/// `target`.
pub fn authorize(registry: &dyn Registry, target: &Did, proof: &Proof, message: &[u8]) -> Option<Authority> {
    let doc = registry.resolve(target).ok()?;
    let (key, authority) = authority_key(&doc, &proof.verification_method, |d| registry.resolve(d).ok())?;
    proof.verify(message, &key.public_key).then_some(authority)
}

/// The registry interface. Implementations serialize mutations and let
/// reads proceed concurrently.
pub trait Registry: Send + Sync {
    /// Store `doc`. A first registration must be signed by one of the
    /// document's own authentication keys; an update by the registered
    /// subject or controller.
    fn register_did_document(&self, doc: DidDocument, proof: &Proof) -> Result<(), RegistryError>;

    fn resolve(&self, did: &Did) -> Result<DidDocument, RegistryError>;

    /// Publish a schema definition. Schemas are public bootstrap data and
    /// need no proof.
    fn register_schema(&self, schema: SchemaDefinition) -> Result<(), RegistryError>;

    fn schema(&self, id: &str) -> Result<SchemaDefinition, RegistryError>;

    /// Create an Active status entry. `proof` signs
    /// [`StatusChange::activate`] and must chain to `issuer`.
    fn create_status(
        &self,
        credential_id: &str,
        issuer: &Did,
        proof: &Proof,
        at: Timestamp,
    ) -> Result<(), RegistryError>;

    /// Revoke. `proof` signs [`StatusChange::revoke`] and must chain to the
    /// issuer recorded for the credential.
    fn set_status(
        &self,
        credential_id: &str,
        proof: &Proof,
        at: Timestamp,
        reason: Option<String>,
    ) -> Result<(), RegistryError>;

    fn check_status(&self, credential_id: &str) -> Result<StatusRecord, RegistryError>;

    fn publish_batch_credential(&self, key: BatchKey, vc: VerifiableCredential) -> Result<(), RegistryError>;

    /// Look up by batch, falling back to the model-level entry.
    fn lookup_batch_credential(&self, key: &BatchKey) -> Result<VerifiableCredential, RegistryError>;

    fn snapshot(&self) -> RegistrySnapshot;
}

pub(crate) fn batchable(vc: &VerifiableCredential) -> Result<CredentialKind, RegistryError> {
    match vc.kind() {
        Some(kind) if kind.is_batchable() => Ok(kind),
        Some(kind) => Err(RegistryError::KindNotBatchable(kind.to_string())),
        None => Err(RegistryError::KindNotBatchable("unknown".into())),
    }
}
