// SPDX-License-Identifier: Apache-2.0

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{RwLock, RwLockWriteGuard};

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::state::{Change, RegistrySnapshot};
use super::{BatchKey, Registry, RegistryError, StatusRecord};
use crate::codec::{decode_canonical_text, encode_canonical_text};
use crate::model::{Did, DidDocument, Proof, Timestamp, VerifiableCredential};
use crate::schemas::SchemaDefinition;

const DIDS: &str = "dids";
const SCHEMAS: &str = "schemas";
const STATUS: &str = "status";
const BATCH: &str = "batch";
const LOG: &str = "log.ndjson";
const LOCK: &str = ".lock";

#[derive(Serialize, Deserialize)]
struct BatchEntry {
    key: BatchKey,
    credential: VerifiableCredential,
}

#[derive(Serialize)]
struct LogRecord<'a> {
    seq: u64,
    op: &'a str,
    target: String,
}

#[derive(Debug)]
struct Cache {
    state: RegistrySnapshot,
    log_len: u64,
    seq: u64,
}

/// Registry persisted as one canonical-text file per entry plus an
/// append-only operation log. Mutations hold an exclusive lock on the
/// directory, so several processes may share one store.
#[derive(Debug)]
pub struct FileRegistry {
    root: PathBuf,
    cache: RwLock<Cache>,
}

fn storage(e: impl std::fmt::Display) -> RegistryError {
    RegistryError::Storage(e.to_string())
}

fn file_name(key: &str) -> String {
    format!("{}.json", URL_SAFE_NO_PAD.encode(Sha256::digest(key.as_bytes())))
}

fn load_dir<T: DeserializeOwned>(dir: &Path) -> Result<Vec<T>, RegistryError> {
    let mut paths = fs::read_dir(dir)
        .map_err(storage)?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(storage)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(storage)?;
            decode_canonical_text(&bytes).map_err(|e| storage(format!("{}: {e}", p.display())))
        })
        .collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RegistryError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(storage)?;
    fs::rename(&tmp, path).map_err(storage)
}

impl FileRegistry {
    /// Open the store at `root`, creating the layout if it is missing.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, RegistryError> {
        let root = root.into();
        for dir in [DIDS, SCHEMAS, STATUS, BATCH] {
            fs::create_dir_all(root.join(dir)).map_err(storage)?;
        }
        let cache = Self::load(&root)?;
        Ok(Self {
            root,
            cache: RwLock::new(cache),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn log_len(root: &Path) -> u64 {
        fs::metadata(root.join(LOG)).map_or(0, |m| m.len())
    }

    fn load(root: &Path) -> Result<Cache, RegistryError> {
        let log_len = Self::log_len(root);
        let seq = match fs::read_to_string(root.join(LOG)) {
            Ok(text) => text.lines().count() as u64,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => 0,
            Err(e) => return Err(storage(e)),
        };
        let mut state = RegistrySnapshot::default();
        for doc in load_dir::<DidDocument>(&root.join(DIDS))? {
            state.did_documents.insert(doc.id.clone(), doc);
        }
        for schema in load_dir::<SchemaDefinition>(&root.join(SCHEMAS))? {
            state.schemas.insert(schema.id.clone(), schema);
        }
        for record in load_dir::<StatusRecord>(&root.join(STATUS))? {
            state.statuses.insert(record.credential_id.clone(), record);
        }
        for entry in load_dir::<BatchEntry>(&root.join(BATCH))? {
            state.batch_credentials.insert(entry.key, entry.credential);
        }
        Ok(Cache { state, log_len, seq })
    }

    /// Re-read the store if another handle or process has written to it.
    fn refresh(&self) -> Result<(), RegistryError> {
        let stale = self.cache.read().unwrap_or_else(|e| e.into_inner()).log_len != Self::log_len(&self.root);
        if stale {
            let fresh = Self::load(&self.root)?;
            *self.cache.write().unwrap_or_else(|e| e.into_inner()) = fresh;
        }
        Ok(())
    }

    fn read<R>(&self, f: impl FnOnce(&RegistrySnapshot) -> R) -> Result<R, RegistryError> {
        self.refresh()?;
        Ok(f(&self.cache.read().unwrap_or_else(|e| e.into_inner()).state))
    }

    fn mutate(
        &self,
        f: impl FnOnce(&mut RegistrySnapshot) -> Result<Change, RegistryError>,
    ) -> Result<(), RegistryError> {
        let lock = File::create(self.root.join(LOCK)).map_err(storage)?;
        lock.lock().map_err(storage)?;
        let mut cache: RwLockWriteGuard<'_, Cache> = self.cache.write().unwrap_or_else(|e| e.into_inner());
        if cache.log_len != Self::log_len(&self.root) {
            *cache = Self::load(&self.root)?;
        }
        let change = f(&mut cache.state)?;
        if let Err(e) = self.persist(&cache.state, &change) {
            // Force a reload so the cache cannot drift from disk.
            cache.log_len = u64::MAX;
            return Err(e);
        }
        let record = LogRecord {
            seq: cache.seq,
            op: change.op(),
            target: change.target(),
        };
        let mut line = encode_canonical_text(&record);
        line.push(b'\n');
        let mut log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.root.join(LOG))
            .map_err(storage)?;
        log.write_all(&line).map_err(storage)?;
        log.sync_data().map_err(storage)?;
        cache.seq += 1;
        cache.log_len = Self::log_len(&self.root);
        drop(cache);
        lock.unlock().map_err(storage)
    }

    fn persist(&self, state: &RegistrySnapshot, change: &Change) -> Result<(), RegistryError> {
        let (dir, key, bytes) = match change {
            Change::Did(did) => (DIDS, did.to_string(), encode_canonical_text(&state.did_documents[did])),
            Change::Schema(id) => (SCHEMAS, id.clone(), encode_canonical_text(&state.schemas[id])),
            Change::Status(id) => (STATUS, id.clone(), encode_canonical_text(&state.statuses[id])),
            Change::Batch(key) => (
                BATCH,
                String::from_utf8(encode_canonical_text(key)).expect("canonical text is UTF-8"),
                encode_canonical_text(&BatchEntry {
                    key: key.clone(),
                    credential: state.batch_credentials[key].clone(),
                }),
            ),
        };
        write_atomic(&self.root.join(dir).join(file_name(&key)), &bytes)
    }
}

impl Registry for FileRegistry {
    fn register_did_document(&self, doc: DidDocument, proof: &Proof) -> Result<(), RegistryError> {
        self.mutate(|s| s.register_did_document(doc, proof))
    }

    fn resolve(&self, did: &Did) -> Result<DidDocument, RegistryError> {
        self.read(|s| s.resolve(did))?
    }

    fn register_schema(&self, schema: SchemaDefinition) -> Result<(), RegistryError> {
        self.mutate(|s| Ok(s.register_schema(schema)))
    }

    fn schema(&self, id: &str) -> Result<SchemaDefinition, RegistryError> {
        self.read(|s| s.schema(id))?
    }

    fn create_status(
        &self,
        credential_id: &str,
        issuer: &Did,
        proof: &Proof,
        at: Timestamp,
    ) -> Result<(), RegistryError> {
        self.mutate(|s| s.create_status(credential_id, issuer, proof, at))
    }

    fn set_status(
        &self,
        credential_id: &str,
        proof: &Proof,
        at: Timestamp,
        reason: Option<String>,
    ) -> Result<(), RegistryError> {
        self.mutate(|s| s.set_status(credential_id, proof, at, reason))
    }

    fn check_status(&self, credential_id: &str) -> Result<StatusRecord, RegistryError> {
        self.read(|s| s.check_status(credential_id))?
    }

    fn publish_batch_credential(&self, key: BatchKey, vc: VerifiableCredential) -> Result<(), RegistryError> {
        self.mutate(|s| s.publish_batch_credential(key, vc))
    }

    fn lookup_batch_credential(&self, key: &BatchKey) -> Result<VerifiableCredential, RegistryError> {
        self.read(|s| s.lookup_batch_credential(key))?
    }

    fn snapshot(&self) -> RegistrySnapshot {
        self.read(Clone::clone)
            .unwrap_or_else(|_| self.cache.read().unwrap_or_else(|e| e.into_inner()).state.clone())
    }
}
