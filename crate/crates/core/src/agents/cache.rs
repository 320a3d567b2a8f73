// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lifecycle::{verify_credential, VerificationReport};
use crate::model::{Did, DidDocument, Proof, Timestamp, VerifiableCredential};
use crate::registry::{BatchKey, Registry, RegistryError, RegistrySnapshot, StatusRecord};
use crate::schemas::SchemaDefinition;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CachedStatus {
    pub record: StatusRecord,
    pub fetched_at: Timestamp,
    /// Set when the last sync saw this entry turn from Active to Revoked.
    pub revoked_since_previous_sync: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SyncSummary {
    pub refreshed: usize,
    pub newly_revoked: Vec<String>,
}

/// A verdict computed from cached status, with the cache's age attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CachedVerdict {
    pub report: VerificationReport,
    pub cache_age_secs: Option<i64>,
    pub stale: bool,
}

/// Status cache kept by an edge or proxy agent and refreshed periodically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeCache {
    entries: BTreeMap<String, CachedStatus>,
    last_sync: Option<Timestamp>,
    pub max_age_secs: i64,
}

impl EdgeCache {
    pub fn new(max_age_secs: i64) -> Self {
        Self {
            entries: BTreeMap::new(),
            last_sync: None,
            max_age_secs,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, credential_id: &str) -> Option<&CachedStatus> {
        self.entries.get(credential_id)
    }

    /// Start tracking `credential_id`, fetching its status now.
    pub fn track(&mut self, credential_id: &str, registry: &dyn Registry, at: Timestamp) -> Result<(), RegistryError> {
        let record = registry.check_status(credential_id)?;
        self.entries.insert(
            credential_id.to_owned(),
            CachedStatus {
                record,
                fetched_at: at,
                revoked_since_previous_sync: false,
            },
        );
        self.last_sync.get_or_insert(at);
        Ok(())
    }

    /// Refresh every tracked entry. An empty cache is left untouched.
    pub fn sync(&mut self, registry: &dyn Registry, at: Timestamp) -> SyncSummary {
        let mut summary = SyncSummary::default();
        if self.entries.is_empty() {
            return summary;
        }
        for (id, cached) in &mut self.entries {
            let Ok(record) = registry.check_status(id) else {
                continue;
            };
            cached.revoked_since_previous_sync = cached.record.is_active() && !record.is_active();
            if cached.revoked_since_previous_sync {
                summary.newly_revoked.push(id.clone());
            }
            cached.record = record;
            cached.fetched_at = at;
            summary.refreshed += 1;
        }
        self.last_sync = Some(at);
        summary
    }

    pub fn age_secs(&self, at: Timestamp) -> Option<i64> {
        self.last_sync.map(|synced| at.seconds_since(synced))
    }

    pub fn is_stale(&self, at: Timestamp) -> bool {
        self.age_secs(at).is_none_or(|age| age > self.max_age_secs)
    }

    /// Registry view answering status queries from this cache.
    pub fn view<'a>(&'a self, registry: &'a dyn Registry) -> CachedRegistry<'a> {
        CachedRegistry {
            cache: self,
            inner: registry,
        }
    }

    pub fn verify(&self, vc: &VerifiableCredential, now: Timestamp, registry: &dyn Registry) -> CachedVerdict {
        CachedVerdict {
            report: verify_credential(vc, now, &self.view(registry)),
            cache_age_secs: self.age_secs(now),
            stale: self.is_stale(now),
        }
    }
}

/// Read-only registry whose status answers come from an [`EdgeCache`].
pub struct CachedRegistry<'a> {
    cache: &'a EdgeCache,
    inner: &'a dyn Registry,
}

fn read_only() -> RegistryError {
    RegistryError::Storage("cached view is read-only".into())
}

impl Registry for CachedRegistry<'_> {
    fn register_did_document(&self, _: DidDocument, _: &Proof) -> Result<(), RegistryError> {
        Err(read_only())
    }

    fn resolve(&self, did: &Did) -> Result<DidDocument, RegistryError> {
        self.inner.resolve(did)
    }

    fn register_schema(&self, _: SchemaDefinition) -> Result<(), RegistryError> {
        Err(read_only())
    }

    fn schema(&self, id: &str) -> Result<SchemaDefinition, RegistryError> {
        self.inner.schema(id)
    }

    fn create_status(&self, _: &str, _: &Did, _: &Proof, _: Timestamp) -> Result<(), RegistryError> {
        Err(read_only())
    }

    fn set_status(&self, _: &str, _: &Proof, _: Timestamp, _: Option<String>) -> Result<(), RegistryError> {
        Err(read_only())
    }

    fn check_status(&self, credential_id: &str) -> Result<StatusRecord, RegistryError> {
        self.cache
            .entry(credential_id)
            .map(|c| c.record.clone())
            .ok_or_else(|| RegistryError::NotFound(format!("{credential_id} (not cached)")))
    }

    fn publish_batch_credential(&self, _: BatchKey, _: VerifiableCredential) -> Result<(), RegistryError> {
        Err(read_only())
    }

    fn lookup_batch_credential(&self, key: &BatchKey) -> Result<VerifiableCredential, RegistryError> {
        self.inner.lookup_batch_credential(key)
    }

    fn snapshot(&self) -> RegistrySnapshot {
        let mut snapshot = self.inner.snapshot();
        snapshot.statuses = self
            .cache
            .entries
            .iter()
            .map(|(id, c)| (id.clone(), c.record.clone()))
            .collect();
        snapshot
    }
}
