// SPDX-License-Identifier: Apache-2.0

use std::sync::RwLock;

use super::state::RegistrySnapshot;
use super::{BatchKey, Registry, RegistryError, StatusRecord};
use crate::model::{Did, DidDocument, Proof, Timestamp, VerifiableCredential};
use crate::schemas::SchemaDefinition;

/// Registry held entirely in process memory.
#[derive(Debug, Default)]
pub struct MemoryRegistry {
    state: RwLock<RegistrySnapshot>,
}

impl MemoryRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, RegistrySnapshot> {
        self.state.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, RegistrySnapshot> {
        self.state.write().unwrap_or_else(|e| e.into_inner())
    }
}

impl Registry for MemoryRegistry {
    fn register_did_document(&self, doc: DidDocument, proof: &Proof) -> Result<(), RegistryError> {
        self.write().register_did_document(doc, proof).map(drop)
    }

    fn resolve(&self, did: &Did) -> Result<DidDocument, RegistryError> {
        self.read().resolve(did)
    }

    fn register_schema(&self, schema: SchemaDefinition) -> Result<(), RegistryError> {
        self.write().register_schema(schema);
        Ok(())
    }

    fn schema(&self, id: &str) -> Result<SchemaDefinition, RegistryError> {
        self.read().schema(id)
    }

    fn create_status(
        &self,
        credential_id: &str,
        issuer: &Did,
        proof: &Proof,
        at: Timestamp,
    ) -> Result<(), RegistryError> {
        self.write().create_status(credential_id, issuer, proof, at).map(drop)
    }

    fn set_status(
        &self,
        credential_id: &str,
        proof: &Proof,
        at: Timestamp,
        reason: Option<String>,
    ) -> Result<(), RegistryError> {
        self.write().set_status(credential_id, proof, at, reason).map(drop)
    }

    fn check_status(&self, credential_id: &str) -> Result<StatusRecord, RegistryError> {
        self.read().check_status(credential_id)
    }

    fn publish_batch_credential(&self, key: BatchKey, vc: VerifiableCredential) -> Result<(), RegistryError> {
        self.write().publish_batch_credential(key, vc).map(drop)
    }

    fn lookup_batch_credential(&self, key: &BatchKey) -> Result<VerifiableCredential, RegistryError> {
        self.read().lookup_batch_credential(key)
    }

    fn snapshot(&self) -> RegistrySnapshot {
        self.read().clone()
    }
}
