// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{authority_key, batchable, BatchKey, CredentialState, RegistryError, StatusChange, StatusRecord};
use crate::model::{Did, DidDocument, Proof, Timestamp, VerifiableCredential};
use crate::schemas::SchemaDefinition;

/// Everything a registry exposes to readers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegistrySnapshot {
    pub did_documents: BTreeMap<Did, DidDocument>,
    pub schemas: BTreeMap<String, SchemaDefinition>,
    pub statuses: BTreeMap<String, StatusRecord>,
    pub batch_credentials: BTreeMap<BatchKey, VerifiableCredential>,
}

/// Which entry a successful mutation touched.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Change {
    Did(Did),
    Schema(String),
    Status(String),
    Batch(BatchKey),
}

impl Change {
    pub(crate) fn op(&self) -> &'static str {
        match self {
            Change::Did(_) => "registerDidDocument",
            Change::Schema(_) => "registerSchema",
            Change::Status(_) => "setStatus",
            Change::Batch(_) => "publishBatchCredential",
        }
    }

    pub(crate) fn target(&self) -> String {
        match self {
            Change::Did(did) => did.to_string(),
            Change::Schema(id) | Change::Status(id) => id.clone(),
            Change::Batch(key) => key.to_string(),
        }
    }
}

impl RegistrySnapshot {
    fn authorized(&self, target: &DidDocument, proof: &Proof, message: &[u8]) -> bool {
        authority_key(target, &proof.verification_method, |d| {
            self.did_documents.get(d).cloned()
        })
        .is_some_and(|(key, _)| proof.verify(message, &key.public_key))
    }

    pub(crate) fn register_did_document(&mut self, doc: DidDocument, proof: &Proof) -> Result<Change, RegistryError> {
        doc.validate()
            .map_err(|e| RegistryError::MalformedDocument(e.to_string()))?;
        let message = crate::codec::encode_canonical_text(&doc);
        let current = self.did_documents.get(&doc.id).unwrap_or(&doc);
        if !self.authorized(current, proof, &message) {
            return Err(RegistryError::UnauthorizedUpdate(doc.id.to_string()));
        }
        let did = doc.id.clone();
        self.did_documents.insert(did.clone(), doc);
        Ok(Change::Did(did))
    }

    pub(crate) fn resolve(&self, did: &Did) -> Result<DidDocument, RegistryError> {
        self.did_documents
            .get(did)
            .cloned()
            .ok_or_else(|| RegistryError::NotFound(did.to_string()))
    }

    pub(crate) fn register_schema(&mut self, schema: SchemaDefinition) -> Change {
        let id = schema.id.clone();
        self.schemas.insert(id.clone(), schema);
        Change::Schema(id)
    }

    pub(crate) fn schema(&self, id: &str) -> Result<SchemaDefinition, RegistryError> {
        self.schemas
            .get(id)
            .cloned()
            .ok_or_else(|| RegistryError::NotFound(id.to_owned()))
    }

    pub(crate) fn create_status(
        &mut self,
        credential_id: &str,
        issuer: &Did,
        proof: &Proof,
        at: Timestamp,
    ) -> Result<Change, RegistryError> {
        if self.statuses.contains_key(credential_id) {
            return Err(RegistryError::StatusExists(credential_id.to_owned()));
        }
        let issuer_doc = self.resolve(issuer)?;
        let message = StatusChange::activate(credential_id, at).signing_input();
        if !self.authorized(&issuer_doc, proof, &message) {
            return Err(RegistryError::UnauthorizedUpdate(credential_id.to_owned()));
        }
        self.statuses.insert(
            credential_id.to_owned(),
            StatusRecord {
                credential_id: credential_id.to_owned(),
                issuer: issuer.clone(),
                state: CredentialState::Active,
                revoked_at: None,
                reason: None,
            },
        );
        Ok(Change::Status(credential_id.to_owned()))
    }

    pub(crate) fn set_status(
        &mut self,
        credential_id: &str,
        proof: &Proof,
        at: Timestamp,
        reason: Option<String>,
    ) -> Result<Change, RegistryError> {
        let record = self.check_status(credential_id)?;
        if !record.is_active() {
            return Err(RegistryError::AlreadyRevoked(credential_id.to_owned()));
        }
        let issuer_doc = self.resolve(&record.issuer)?;
        let message = StatusChange::revoke(credential_id, at, reason.clone()).signing_input();
        if !self.authorized(&issuer_doc, proof, &message) {
            return Err(RegistryError::UnauthorizedRevoker(credential_id.to_owned()));
        }
        self.statuses.insert(
            credential_id.to_owned(),
            StatusRecord {
                state: CredentialState::Revoked,
                revoked_at: Some(at),
                reason,
                ..record
            },
        );
        Ok(Change::Status(credential_id.to_owned()))
    }

    pub(crate) fn check_status(&self, credential_id: &str) -> Result<StatusRecord, RegistryError> {
        self.statuses
            .get(credential_id)
            .cloned()
            .ok_or_else(|| RegistryError::NotFound(credential_id.to_owned()))
    }

    pub(crate) fn publish_batch_credential(
        &mut self,
        key: BatchKey,
        vc: VerifiableCredential,
    ) -> Result<Change, RegistryError> {
        if key.model_no.is_empty() || key.batch_no.as_deref() == Some("") {
            return Err(RegistryError::MalformedBatchKey);
        }
        batchable(&vc)?;
        if vc.issuer != key.manufacturer {
            return Err(RegistryError::IssuerMismatch {
                issuer: vc.issuer.clone(),
                manufacturer: key.manufacturer.clone(),
            });
        }
        self.check_status(&vc.id)?;
        let issuer_doc = self.resolve(&vc.issuer)?;
        let signing_input = vc.signing_input();
        let signed = vc
            .proofs
            .iter()
            .any(|p| p.signer() == &vc.issuer && self.authorized(&issuer_doc, p, &signing_input));
        if !signed {
            return Err(RegistryError::UnauthorizedUpdate(key.to_string()));
        }
        self.batch_credentials.insert(key.clone(), vc);
        Ok(Change::Batch(key))
    }

    pub(crate) fn lookup_batch_credential(&self, key: &BatchKey) -> Result<VerifiableCredential, RegistryError> {
        self.batch_credentials
            .get(key)
            .or_else(|| self.batch_credentials.get(&key.model_level()))
            .cloned()
            .ok_or_else(|| RegistryError::NotFound(key.to_string()))
    }
}
