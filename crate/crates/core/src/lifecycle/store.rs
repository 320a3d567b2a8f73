// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::RwLock;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use sha2::{Digest, Sha256};

use crate::codec::{decode_canonical_text, encode_canonical_text};
use crate::model::VerifiableCredential;

/// Holder-side credential storage, keyed by credential id.
pub trait CredentialStore: Send + Sync {
    fn put(&self, vc: VerifiableCredential) -> Result<(), String>;
    fn get(&self, id: &str) -> Option<VerifiableCredential>;
    fn all(&self) -> Vec<VerifiableCredential>;
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    credentials: RwLock<BTreeMap<String, VerifiableCredential>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl CredentialStore for MemoryStore {
    fn put(&self, vc: VerifiableCredential) -> Result<(), String> {
        self.credentials
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(vc.id.clone(), vc);
        Ok(())
    }

    fn get(&self, id: &str) -> Option<VerifiableCredential> {
        self.credentials
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
    }

    fn all(&self) -> Vec<VerifiableCredential> {
        self.credentials
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .values()
            .cloned()
            .collect()
    }
}

/// One canonical-text file per credential.
#[derive(Debug)]
pub struct DirectoryStore {
    root: PathBuf,
}

impl DirectoryStore {
    pub fn open(root: impl Into<PathBuf>) -> std::io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    fn path(&self, id: &str) -> PathBuf {
        self.root.join(format!(
            "{}.json",
            URL_SAFE_NO_PAD.encode(Sha256::digest(id.as_bytes()))
        ))
    }
}

impl CredentialStore for DirectoryStore {
    fn put(&self, vc: VerifiableCredential) -> Result<(), String> {
        let path = self.path(&vc.id);
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, encode_canonical_text(&vc)).map_err(|e| e.to_string())?;
        fs::rename(&tmp, &path).map_err(|e| e.to_string())
    }

    fn get(&self, id: &str) -> Option<VerifiableCredential> {
        let bytes = fs::read(self.path(id)).ok()?;
        decode_canonical_text(&bytes).ok()
    }

    fn all(&self) -> Vec<VerifiableCredential> {
        let Ok(entries) = fs::read_dir(&self.root) else {
            return Vec::new();
        };
        let mut out: Vec<VerifiableCredential> = entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .filter_map(|p| fs::read(p).ok())
            .filter_map(|b| decode_canonical_text(&b).ok())
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }
}
